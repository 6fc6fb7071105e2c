//! Plain-text `key = value` run configuration.
//!
//! Keys are the long command-line flag names without the leading `--`, e.g.
//! `alpha-range = 0.5, 3.0` or `entropy_tol = 1e-6`. `#` starts a comment.

use crate::analysis::PipelineConfig;
use crate::error::{Error, Result};
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub radius: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub omega: Option<usize>,
    pub omega_min: Option<usize>,
    pub omega_max: Option<usize>,
    pub alpha_range: Option<(f64, f64)>,
    pub nm: Option<usize>,
    pub nm_max: Option<usize>,
    pub lmax: Option<usize>,
    pub lmax_cap: Option<usize>,
    pub angle_nodes: Option<usize>,
    pub energy_tol: Option<f64>,
    pub entropy_tol: Option<f64>,
    pub deficit_tol: Option<f64>,
    pub threads: Option<usize>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Config {
        line,
        msg: format!("cannot parse {key} value {raw:?}"),
    })
}

/// Comma-separated floats, e.g. `0.5, 1, 2.5`.
pub fn parse_float_list(raw: &str) -> std::result::Result<Vec<f64>, String> {
    raw.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: {:?}", v.trim()))
        })
        .collect()
}

/// `lo,hi` pair.
pub fn parse_range(raw: &str) -> std::result::Result<(f64, f64), String> {
    match parse_float_list(raw)?.as_slice() {
        &[lo, hi] => Ok((lo, hi)),
        _ => Err(format!("expected two comma-separated numbers, got {raw:?}")),
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, val) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                msg: format!("expected key = value, got {content:?}"),
            })?;
            let key = key.trim().replace('-', "_");
            let val = val.trim();
            let list_err = |msg: String| Error::Config { line, msg };
            match key.as_str() {
                "radius" => cfg.radius = Some(value(line, &key, val)?),
                "radii" => cfg.radii = Some(parse_float_list(val).map_err(list_err)?),
                "omega" => cfg.omega = Some(value(line, &key, val)?),
                "omega_min" => cfg.omega_min = Some(value(line, &key, val)?),
                "omega_max" => cfg.omega_max = Some(value(line, &key, val)?),
                "alpha_range" => cfg.alpha_range = Some(parse_range(val).map_err(list_err)?),
                "nm" => cfg.nm = Some(value(line, &key, val)?),
                "nm_max" => cfg.nm_max = Some(value(line, &key, val)?),
                "lmax" => cfg.lmax = Some(value(line, &key, val)?),
                "lmax_cap" => cfg.lmax_cap = Some(value(line, &key, val)?),
                "angle_nodes" => cfg.angle_nodes = Some(value(line, &key, val)?),
                "energy_tol" => cfg.energy_tol = Some(value(line, &key, val)?),
                "entropy_tol" => cfg.entropy_tol = Some(value(line, &key, val)?),
                "deficit_tol" => cfg.deficit_tol = Some(value(line, &key, val)?),
                "threads" => cfg.threads = Some(value(line, &key, val)?),
                "format" => cfg.format = Some(val.to_string()),
                "out" => cfg.out = Some(PathBuf::from(val)),
                _ => {
                    return Err(Error::Config {
                        line,
                        msg: format!("unknown key {key:?}"),
                    })
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Fields of `other` that are set win.
    pub fn overridden_by(self, other: Self) -> Self {
        Self {
            radius: other.radius.or(self.radius),
            radii: other.radii.or(self.radii),
            omega: other.omega.or(self.omega),
            omega_min: other.omega_min.or(self.omega_min),
            omega_max: other.omega_max.or(self.omega_max),
            alpha_range: other.alpha_range.or(self.alpha_range),
            nm: other.nm.or(self.nm),
            nm_max: other.nm_max.or(self.nm_max),
            lmax: other.lmax.or(self.lmax),
            lmax_cap: other.lmax_cap.or(self.lmax_cap),
            angle_nodes: other.angle_nodes.or(self.angle_nodes),
            energy_tol: other.energy_tol.or(self.energy_tol),
            entropy_tol: other.entropy_tol.or(self.entropy_tol),
            deficit_tol: other.deficit_tol.or(self.deficit_tol),
            threads: other.threads.or(self.threads),
            format: other.format.or(self.format),
            out: other.out.or(self.out),
        }
    }

    pub fn pipeline(&self) -> Result<PipelineConfig> {
        let mut p = PipelineConfig {
            fixed_omega: self.omega,
            ..PipelineConfig::default()
        };
        if let Some(v) = self.omega_min {
            p.omega_min = v;
        }
        if let Some(v) = self.omega_max {
            p.omega_max = v;
        }
        if let Some(v) = self.alpha_range {
            p.alpha_range = v;
        }
        if let Some(v) = self.nm {
            p.n_m = v;
            p.n_m_max = p.n_m_max.max(v);
        }
        if let Some(v) = self.nm_max {
            p.n_m_max = v;
        }
        if let Some(v) = self.lmax {
            p.l_m = v;
            p.l_m_max = p.l_m_max.max(v + 2 * p.l_m_step);
        }
        if let Some(v) = self.lmax_cap {
            p.l_m_max = v;
        }
        if let Some(v) = self.angle_nodes {
            p.angle_nodes = v;
        }
        if let Some(v) = self.energy_tol {
            p.targets.energy_tol = v;
        }
        if let Some(v) = self.entropy_tol {
            p.targets.entropy_tol = v;
        }
        if let Some(v) = self.deficit_tol {
            p.deficit_tolerance = v;
        }
        p.validate()?;
        Ok(p)
    }
}
