//! Radius sweeps with convergence control and analysis of the resulting
//! entropy and energy curves.

use crate::entropy::{entropies, EntropyResult, DEFAULT_DEFICIT_TOLERANCE};
use crate::error::{Error, Result};
use crate::schmidt::{schmidt_spectrum, DEFAULT_ANGLE_NODES, DEFAULT_LMAX, DEFAULT_NM};
use crate::solver::{
    optimize_alpha, solve_at_alpha, Cavity, HamiltonianSpec, SolverSettings, VariationalState,
    ALPHA_GRID_STEP, DEFAULT_ALPHA_RANGE,
};
use crate::spline::{bracketed_roots, NaturalCubicSpline};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Sweep grid used by `scan --default-grid`.
pub const DEFAULT_GRID: [f64; 18] = [
    0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 7.5,
    10.0, 15.0,
];

/// Radii below this have not been validated.
pub const SMALLEST_VALIDATED_RADIUS: f64 = 0.125;

/// Hard limits on the exponent search when the range has to be moved.
const ALPHA_FLOOR: f64 = 0.05;
const ALPHA_CEILING: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTargets {
    /// Hartree.
    pub energy_tol: f64,
    pub entropy_tol: f64,
}

impl Default for ConvergenceTargets {
    fn default() -> Self {
        Self {
            energy_tol: 1e-5,
            entropy_tol: 1e-5,
        }
    }
}

/// Everything [`converge_point`] needs besides the radius.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub omega_min: usize,
    pub omega_max: usize,
    /// Solve only at this order instead of iterating `omega`.
    pub fixed_omega: Option<usize>,
    pub alpha_range: (f64, f64),
    /// Half-width of the `alpha` window around the previous order's optimum.
    pub alpha_window: f64,
    pub n_m: usize,
    pub n_m_max: usize,
    pub l_m: usize,
    pub l_m_step: usize,
    pub l_m_max: usize,
    pub angle_nodes: usize,
    pub deficit_tolerance: f64,
    pub targets: ConvergenceTargets,
    pub solver: SolverSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            omega_min: 3,
            omega_max: 7,
            fixed_omega: None,
            alpha_range: DEFAULT_ALPHA_RANGE,
            alpha_window: 0.5,
            n_m: DEFAULT_NM,
            n_m_max: 1201,
            l_m: DEFAULT_LMAX,
            l_m_step: 6,
            l_m_max: 36,
            angle_nodes: DEFAULT_ANGLE_NODES,
            deficit_tolerance: DEFAULT_DEFICIT_TOLERANCE,
            targets: ConvergenceTargets::default(),
            solver: SolverSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.omega_min > self.omega_max {
            return bad("omega_min must not exceed omega_max");
        }
        if !(self.alpha_range.0 > 0.0 && self.alpha_range.1 > self.alpha_range.0) {
            return bad("alpha range must satisfy 0 < lo < hi");
        }
        if self.n_m < 3 || self.n_m_max < self.n_m {
            return bad("need 3 <= n_m <= n_m_max");
        }
        if self.l_m_step == 0 || self.l_m_max < self.l_m {
            return bad("need l_m_step >= 1 and l_m <= l_m_max");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum PointStatus {
    Converged,
    /// Finished, but some refinement hit its cap; the detail lists which.
    CapsReached(String),
    Failed(String),
}

/// One completed point of a radius sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    #[serde(rename = "R")]
    pub radius: f64,
    pub omega: usize,
    pub alpha: f64,
    #[serde(rename = "E0")]
    pub energy: f64,
    #[serde(rename = "S_vN")]
    pub von_neumann: f64,
    #[serde(rename = "L")]
    pub linear: f64,
    #[serde(rename = "prob_sum")]
    pub probability_sum: f64,
    pub n_m: usize,
    pub l_m: usize,
    pub seconds: f64,
    #[serde(flatten)]
    pub status: PointStatus,
}

impl ScanRecord {
    fn failed(radius: f64, msg: String) -> Self {
        Self {
            radius,
            omega: 0,
            alpha: f64::NAN,
            energy: f64::NAN,
            von_neumann: f64::NAN,
            linear: f64::NAN,
            probability_sum: f64::NAN,
            n_m: 0,
            l_m: 0,
            seconds: 0.0,
            status: PointStatus::Failed(msg),
        }
    }

    pub fn is_complete(&self) -> bool {
        !matches!(self.status, PointStatus::Failed(_))
            && self.energy.is_finite()
            && self.von_neumann.is_finite()
            && self.linear.is_finite()
    }
}

/// Runs [`optimize_alpha`], moving the range when the optimum sits on an edge.
///
/// Returns the state and whether the exponent ended pinned at a hard limit.
pub fn optimize_alpha_adaptive(
    omega: usize,
    spec: &HamiltonianSpec,
    range: (f64, f64),
    settings: &SolverSettings,
) -> Result<(VariationalState, bool)> {
    let (mut lo, mut hi) = range;
    for _ in 0..8 {
        match optimize_alpha(omega, spec, (lo, hi), settings) {
            Err(Error::AlphaAtBoundary { alpha, .. }) => {
                let width = hi - lo;
                let at_top = (alpha - hi).abs() <= (alpha - lo).abs();
                if at_top {
                    if hi >= ALPHA_CEILING {
                        return Ok((solve_at_alpha(omega, hi, spec, settings)?, true));
                    }
                    lo = hi - 2.0 * ALPHA_GRID_STEP;
                    hi = (hi + width).min(ALPHA_CEILING);
                } else {
                    if lo <= ALPHA_FLOOR {
                        return Ok((solve_at_alpha(omega, lo, spec, settings)?, true));
                    }
                    hi = lo + 2.0 * ALPHA_GRID_STEP;
                    lo = (lo - width).max(ALPHA_FLOOR);
                }
            }
            other => return other.map(|s| (s, false)),
        }
    }
    Err(Error::AlphaAtBoundary { alpha: hi, lo, hi })
}

fn close(a: &EntropyResult, b: &EntropyResult, tol: f64) -> bool {
    (a.von_neumann - b.von_neumann).abs() < tol && (a.linear - b.linear).abs() < tol
}

// Entropies at (n_m, l_m) and at (n_m, l_m + step) from one kernel build.
fn entropy_pair(
    state: &VariationalState,
    n_m: usize,
    l_m: usize,
    config: &PipelineConfig,
) -> Result<(EntropyResult, EntropyResult)> {
    let spec = schmidt_spectrum(state, n_m, l_m + config.l_m_step, config.angle_nodes)?;
    let hi = entropies(&spec, config.deficit_tolerance)?;
    let lo = entropies(&spec.truncated(l_m), config.deficit_tolerance)?;
    Ok((lo, hi))
}

/// Converged ground state and entropies at one radius, with its state.
pub fn converge_state(
    cavity: Cavity,
    config: &PipelineConfig,
) -> Result<(ScanRecord, VariationalState)> {
    config.validate()?;
    let start = Instant::now();
    let spec = HamiltonianSpec {
        cavity,
        z: 2.0,
        interaction: true,
    };
    spec.validate()?;
    let omegas: Vec<usize> = match config.fixed_omega {
        Some(w) => vec![w],
        None => (config.omega_min..=config.omega_max).collect(),
    };

    let mut notes = Vec::new();
    let mut prev: Option<(VariationalState, EntropyResult)> = None;
    let mut omega_converged = config.fixed_omega.is_some();
    for &omega in &omegas {
        let range = match &prev {
            Some((st, _)) => (
                (st.alpha - config.alpha_window).max(ALPHA_FLOOR),
                st.alpha + config.alpha_window,
            ),
            None => config.alpha_range,
        };
        let (state, pinned) = optimize_alpha_adaptive(omega, &spec, range, &config.solver)?;
        if pinned {
            notes.push(format!("alpha pinned at {} for omega={omega}", state.alpha));
        }
        let spectrum = schmidt_spectrum(&state, config.n_m, config.l_m, config.angle_nodes)?;
        let ent = entropies(&spectrum, config.deficit_tolerance)?;
        if let Some((ps, pe)) = &prev {
            if (state.energy - ps.energy).abs() < config.targets.energy_tol
                && close(&ent, pe, config.targets.entropy_tol)
            {
                omega_converged = true;
                prev = Some((state, ent));
                break;
            }
        }
        prev = Some((state, ent));
    }
    let (state, _) = prev.expect("at least one order");
    if !omega_converged {
        notes.push(format!("omega cap {} reached", config.omega_max));
    }

    let tol = config.targets.entropy_tol;
    let mut n_m = config.n_m;
    let mut l_m = config.l_m;
    let mut cur = entropy_pair(&state, n_m, l_m, config)?;
    loop {
        let finer = 2 * n_m - 1;
        if finer > config.n_m_max {
            notes.push(format!("n_m cap {} reached", config.n_m_max));
            break;
        }
        let next = entropy_pair(&state, finer, l_m, config)?;
        n_m = finer;
        let done = close(&cur.0, &next.0, tol);
        cur = next;
        if done {
            break;
        }
    }
    while !close(&cur.0, &cur.1, tol) {
        if l_m + 2 * config.l_m_step > config.l_m_max {
            notes.push(format!("l_m cap {} reached", config.l_m_max));
            break;
        }
        l_m += config.l_m_step;
        cur = entropy_pair(&state, n_m, l_m, config)?;
    }
    let ent = cur.1;

    let status = if notes.is_empty() {
        PointStatus::Converged
    } else {
        PointStatus::CapsReached(notes.join("; "))
    };
    let record = ScanRecord {
        radius: spec.radius(),
        omega: state.omega(),
        alpha: state.alpha,
        energy: state.energy,
        von_neumann: ent.von_neumann,
        linear: ent.linear,
        probability_sum: ent.probability_sum,
        n_m: ent.n_m,
        l_m: ent.l_m,
        seconds: start.elapsed().as_secs_f64(),
        status,
    };
    Ok((record, state))
}

/// Raises `omega`, `n_m` and `l_m` until energy and entropies are stable.
pub fn converge_point(radius: f64, config: &PipelineConfig) -> Result<ScanRecord> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidRadius(radius));
    }
    Ok(converge_state(Cavity::Radius(radius), config)?.0)
}

/// Converges every radius; failures become records with a `Failed` status.
pub fn scan(radii: &[f64], config: &PipelineConfig) -> Result<Vec<ScanRecord>> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("radius list is empty".into()));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument(
            "all radii must be positive and finite".into(),
        ));
    }
    if radii
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::InvalidArgument(
            "radii must be strictly ascending".into(),
        ));
    }
    config.validate()?;
    Ok(radii
        .par_iter()
        .map(|&r| {
            converge_point(r, config).unwrap_or_else(|e| ScanRecord::failed(r, e.to_string()))
        })
        .collect())
}

/// Derived features of the `S_vN(R)`, `L(R)` and `E0(R)` curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveAnalysis {
    pub inflection_r_von_neumann: Option<f64>,
    pub inflection_r_linear: Option<f64>,
    /// Radius where the ground-state energy crosses zero.
    pub critical_radius: Option<f64>,
    /// Least-squares `c` in `S_vN ~ c L`.
    pub rescale_factor: f64,
    /// Largest `|S_vN - c L| / S_vN` over records with `R > 3`.
    pub rescale_max_relative_error_above_3: Option<f64>,
    pub radius_range: (f64, f64),
    pub points: usize,
}

/// Least-squares proportionality constant through the origin.
pub fn proportionality_constant(x: &[f64], y: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let den: f64 = x.iter().map(|a| a * a).sum();
    num / den
}

/// Largest relative error of `S_vN ~ factor * L` over records with `R > r_min`.
pub fn max_rescale_error(records: &[ScanRecord], factor: f64, r_min: f64) -> Option<f64> {
    records
        .iter()
        .filter(|r| r.radius > r_min && r.is_complete())
        .map(|r| ((r.von_neumann - factor * r.linear) / r.von_neumann).abs())
        .reduce(f64::max)
}

/// Splines the sweep and locates inflection points, the zero-energy radius
/// and the best `S_vN / L` proportionality constant.
pub fn analyze_curve(records: &[ScanRecord]) -> Result<CurveAnalysis> {
    let mut pts: Vec<&ScanRecord> = records.iter().filter(|r| r.is_complete()).collect();
    if pts.len() < 8 {
        return Err(Error::Analysis(format!(
            "need at least 8 completed records, got {}",
            pts.len()
        )));
    }
    pts.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    let r: Vec<f64> = pts.iter().map(|p| p.radius).collect();
    let s: Vec<f64> = pts.iter().map(|p| p.von_neumann).collect();
    let l: Vec<f64> = pts.iter().map(|p| p.linear).collect();
    let e: Vec<f64> = pts.iter().map(|p| p.energy).collect();
    let spline_s = NaturalCubicSpline::new(&r, &s)?;
    let spline_l = NaturalCubicSpline::new(&r, &l)?;
    let spline_e = NaturalCubicSpline::new(&r, &e)?;

    // Natural end conditions force zero curvature at the outer knots, so
    // only sign changes between interior knots count.
    let interior = &r[1..r.len() - 1];
    let tol = 1e-10;
    let inflection = |sp: &NaturalCubicSpline| {
        bracketed_roots(interior, tol, true, |x| sp.second_derivative(x))
            .first()
            .copied()
    };
    let critical = bracketed_roots(&r, tol, true, |x| spline_e.eval(x))
        .first()
        .copied();

    let factor = proportionality_constant(&l, &s);
    let owned: Vec<ScanRecord> = pts.iter().map(|p| (*p).clone()).collect();
    Ok(CurveAnalysis {
        inflection_r_von_neumann: inflection(&spline_s),
        inflection_r_linear: inflection(&spline_l),
        critical_radius: critical,
        rescale_factor: factor,
        rescale_max_relative_error_above_3: max_rescale_error(&owned, factor, 3.0),
        radius_range: (r[0], r[r.len() - 1]),
        points: r.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(radius: f64) -> ScanRecord {
        // logistic-shaped entropies with inflections at 0.8 / 0.9 and E = 1/R^2 - 1
        let s = 0.085 / (1.0 + (-(radius - 0.9) * 4.0).exp());
        let l = 0.016 / (1.0 + (-(radius - 0.8) * 4.0).exp());
        ScanRecord {
            radius,
            omega: 7,
            alpha: 1.0,
            energy: 1.0 / (radius * radius) - 1.0,
            von_neumann: s,
            linear: l,
            probability_sum: 1.0,
            n_m: 301,
            l_m: 24,
            seconds: 0.0,
            status: PointStatus::Converged,
        }
    }

    #[test]
    fn analysis_of_synthetic_curves() {
        let radii: Vec<f64> = (1..=60).map(|i| 0.05 * i as f64).collect();
        let recs: Vec<ScanRecord> = radii.iter().map(|&r| synthetic(r)).collect();
        let a = analyze_curve(&recs).unwrap();
        assert!(
            (a.inflection_r_von_neumann.unwrap() - 0.9).abs() < 0.01,
            "{a:?}"
        );
        assert!((a.inflection_r_linear.unwrap() - 0.8).abs() < 0.01);
        assert!((a.critical_radius.unwrap() - 1.0).abs() < 1e-3);
        assert_eq!(a.points, 60);
    }

    #[test]
    fn proportionality() {
        let x = [1.0, 2.0, 3.0];
        let y = [2.0, 4.0, 6.0];
        assert!((proportionality_constant(&x, &y) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn analysis_needs_enough_points_and_reports_missing_roots() {
        let recs: Vec<ScanRecord> = (1..=5).map(|i| synthetic(i as f64)).collect();
        assert!(analyze_curve(&recs).is_err());
        // monotone convex data: no inflection, no zero crossing
        let recs: Vec<ScanRecord> = (1..=10)
            .map(|i| {
                let mut r = synthetic(i as f64);
                r.von_neumann = (i * i) as f64;
                r.linear = (i * i) as f64;
                r.energy = 1.0 + i as f64;
                r
            })
            .collect();
        let a = analyze_curve(&recs).unwrap();
        assert!(a.inflection_r_von_neumann.is_none() && a.critical_radius.is_none());
    }

    #[test]
    fn scan_rejects_bad_lists() {
        let cfg = PipelineConfig::default();
        assert!(scan(&[], &cfg).is_err());
        assert!(scan(&[1.0, 0.5], &cfg).is_err());
        assert!(scan(&[-1.0], &cfg).is_err());
        assert!(converge_point(0.0, &cfg).is_err());
    }

    #[test]
    fn failed_points_are_kept_in_order() {
        let cfg = PipelineConfig {
            n_m_max: 2,
            ..PipelineConfig::default()
        };
        // invalid config: every point fails at validation
        assert!(scan(&[1.0, 2.0], &cfg).is_err());
        let rec = ScanRecord::failed(1.5, "boom".into());
        assert!(!rec.is_complete());
    }
}
