use clap::{Args, Parser, Subcommand, ValueEnum};
use confined_helium::analysis::{
    analyze_curve, converge_state, scan, PointStatus, ScanRecord, DEFAULT_GRID,
    SMALLEST_VALIDATED_RADIUS,
};
use confined_helium::config::{parse_range, ConfigFile};
use confined_helium::io::{read_csv, write_csv, write_json};
use confined_helium::schmidt::{build_kernel, nystrom_spectrum, write_kernel_dump};
use confined_helium::solver::{
    optimize_alpha, solve_at_alpha, Cavity, HamiltonianSpec, FREE_RADIUS,
};
use confined_helium::{Error, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "confined-helium",
    version,
    about = "Helium in an impenetrable spherical cavity: energies and entanglement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Converge a single radius and print E0, alpha, omega and the entropies.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Use the large-cavity stand-in for the free atom.
        #[arg(long, conflicts_with = "radius")]
        free: bool,
    },
    /// Sweep a list of radii.
    Scan {
        #[command(flatten)]
        common: Common,
        /// Comma-separated ascending radii.
        #[arg(long, value_delimiter = ',', conflicts_with = "default_grid")]
        radii: Option<Vec<f64>>,
        #[arg(long)]
        default_grid: bool,
        /// Write 0 in the seconds column so repeated runs are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
    /// Spline a scan CSV and report inflection points, critical radius and rescale factor as JSON.
    Analyze {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one radial kernel f_l(r, r') and its eigenvalues.
    KernelDump {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        l: usize,
        /// Fixed exponent; optimized when absent.
        #[arg(long)]
        alpha: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    radius: Option<f64>,
    /// Fixed expansion order; otherwise raised until converged.
    #[arg(long)]
    omega: Option<usize>,
    #[arg(long, value_parser = parse_range, value_name = "LO,HI")]
    alpha_range: Option<(f64, f64)>,
    #[arg(long)]
    nm: Option<usize>,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long)]
    energy_tol: Option<f64>,
    #[arg(long)]
    entropy_tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Common {
    fn resolve(&self) -> Result<ConfigFile> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let flags = ConfigFile {
            radius: self.radius,
            omega: self.omega,
            alpha_range: self.alpha_range,
            nm: self.nm,
            lmax: self.lmax,
            energy_tol: self.energy_tol,
            entropy_tol: self.entropy_tol,
            threads: self.threads,
            format: self.format.map(|f| {
                if f == Format::Csv {
                    "csv".into()
                } else {
                    "json".into()
                }
            }),
            out: self.out.clone(),
            ..ConfigFile::default()
        };
        let merged = file.overridden_by(flags);
        if let Some(n) = merged.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        }
        Ok(merged)
    }
}

fn format_of(cfg: &ConfigFile) -> Result<Format> {
    match cfg.format.as_deref() {
        None | Some("csv") => Ok(Format::Csv),
        Some("json") => Ok(Format::Json),
        Some(other) => Err(Error::InvalidArgument(format!(
            "unknown format {other:?}; use csv or json"
        ))),
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn warn_small(radii: &[f64]) {
    for r in radii.iter().filter(|&&r| r < SMALLEST_VALIDATED_RADIUS) {
        eprintln!("warning: R = {r} is below {SMALLEST_VALIDATED_RADIUS}; results there are not validated");
    }
}

fn cavity_of(cfg: &ConfigFile, free: bool) -> Result<Cavity> {
    match (cfg.radius, free) {
        (_, true) => Ok(Cavity::Free),
        (Some(r), false) => Ok(Cavity::Radius(r)),
        (None, false) => Err(Error::InvalidArgument("give --radius or --free".into())),
    }
}

fn report_status(rec: &ScanRecord) {
    match &rec.status {
        PointStatus::Converged => {}
        PointStatus::CapsReached(d) => {
            eprintln!("warning: R = {}: not converged ({d})", rec.radius)
        }
        PointStatus::Failed(d) => eprintln!("warning: R = {}: failed ({d})", rec.radius),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { common, free } => {
            let cfg = common.resolve()?;
            let cavity = cavity_of(&cfg, free)?;
            warn_small(&[cavity.radius()]);
            let (rec, _) = converge_state(cavity, &cfg.pipeline()?)?;
            report_status(&rec);
            let mut out = output(&cfg.out)?;
            match cfg.format.as_deref() {
                Some("json") => {
                    serde_json::to_writer_pretty(&mut out, &rec)?;
                    writeln!(out)?;
                }
                Some("csv") => write_csv(&mut out, std::slice::from_ref(&rec), true)?,
                None => {
                    writeln!(
                        out,
                        "R        = {}{}",
                        rec.radius,
                        if free { " (free)" } else { "" }
                    )?;
                    writeln!(out, "omega    = {}", rec.omega)?;
                    writeln!(out, "alpha    = {:.6}", rec.alpha)?;
                    writeln!(out, "E0       = {:.9}", rec.energy)?;
                    writeln!(out, "S_vN     = {:.9}", rec.von_neumann)?;
                    writeln!(out, "L        = {:.9}", rec.linear)?;
                    writeln!(out, "prob_sum = {:.12}", rec.probability_sum)?;
                    writeln!(out, "n_m      = {}", rec.n_m)?;
                    writeln!(out, "l_m      = {}", rec.l_m)?;
                    writeln!(out, "seconds  = {:.2}", rec.seconds)?;
                }
                Some(other) => {
                    return Err(Error::InvalidArgument(format!("unknown format {other:?}")))
                }
            }
            out.flush()?;
        }
        Command::Scan {
            common,
            radii,
            default_grid,
            no_timing,
        } => {
            let cfg = common.resolve()?;
            let radii = match (radii.or(cfg.radii.clone()), default_grid) {
                (_, true) => DEFAULT_GRID.to_vec(),
                (Some(r), false) => r,
                (None, false) => {
                    return Err(Error::InvalidArgument(
                        "give --radii or --default-grid".into(),
                    ))
                }
            };
            warn_small(&radii);
            let format = format_of(&cfg)?;
            let records = scan(&radii, &cfg.pipeline()?)?;
            records.iter().for_each(report_status);
            let mut out = output(&cfg.out)?;
            match format {
                Format::Csv => write_csv(&mut out, &records, !no_timing)?,
                Format::Json => write_json(&mut out, &records, !no_timing)?,
            }
            out.flush()?;
        }
        Command::Analyze { input, out } => {
            let records = read_csv(File::open(&input)?)?;
            let analysis = analyze_curve(&records)?;
            let mut out = output(&out)?;
            serde_json::to_writer_pretty(&mut out, &analysis)?;
            writeln!(out)?;
            out.flush()?;
        }
        Command::KernelDump { common, l, alpha } => {
            let cfg = common.resolve()?;
            let pipeline = cfg.pipeline()?;
            let radius = cfg.radius.unwrap_or(FREE_RADIUS);
            warn_small(&[radius]);
            let spec = HamiltonianSpec::helium(radius);
            let omega = pipeline.fixed_omega.unwrap_or(pipeline.omega_max);
            let state = match alpha {
                Some(a) => solve_at_alpha(omega, a, &spec, &pipeline.solver)?,
                None => optimize_alpha(omega, &spec, pipeline.alpha_range, &pipeline.solver)?,
            };
            let kernel = build_kernel(&state, l, pipeline.n_m, pipeline.angle_nodes)?;
            let k = nystrom_spectrum(&kernel);
            let mut out = output(&cfg.out)?;
            write_kernel_dump(&mut out, &kernel, &k)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
