//! Von Neumann and linear entanglement entropy of a Schmidt spectrum.
//!
//! Each `(n, l)` entry stands for `2l+1` equal eigenvalues of the reduced
//! density matrix. Sums are taken over the truncated spectrum as is; the
//! missing probability is reported, not redistributed.

use crate::error::{Error, Result};
use crate::schmidt::SchmidtSpectrum;
use serde::{Deserialize, Serialize};

/// Largest probability deficit accepted by default.
pub const DEFAULT_DEFICIT_TOLERANCE: f64 = 1e-4;

/// Eigenvalues below this are skipped in the `lambda log lambda` sum.
pub const LAMBDA_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyResult {
    /// Von Neumann entropy in bits.
    pub von_neumann: f64,
    pub linear: f64,
    pub probability_sum: f64,
    pub n_m: usize,
    pub l_m: usize,
}

fn check_deficit(spec: &SchmidtSpectrum, tolerance: f64) -> Result<()> {
    let deficit = spec.deficit();
    if deficit.abs() > tolerance {
        return Err(Error::ProbabilityDeficit {
            deficit,
            tolerance,
            n_m: spec.n_m,
            l_m: spec.l_m,
            hint_n_m: 2 * spec.n_m.max(2) - 1,
            hint_l_m: spec.l_m + 6,
        });
    }
    Ok(())
}

/// `-sum (2l+1) lambda log2 lambda` without any deficit check.
pub fn von_neumann_raw(spec: &SchmidtSpectrum) -> f64 {
    spec.entries
        .iter()
        .filter(|e| e.lambda > LAMBDA_FLOOR)
        .map(|e| -e.weight() * e.lambda * e.lambda.log2())
        .sum()
}

/// `1 - sum (2l+1) lambda^2` without any deficit check.
pub fn linear_entropy_raw(spec: &SchmidtSpectrum) -> f64 {
    1.0 - spec
        .entries
        .iter()
        .map(|e| e.weight() * e.lambda * e.lambda)
        .sum::<f64>()
}

pub fn von_neumann(spec: &SchmidtSpectrum, tolerance: f64) -> Result<f64> {
    check_deficit(spec, tolerance)?;
    Ok(von_neumann_raw(spec))
}

pub fn linear_entropy(spec: &SchmidtSpectrum, tolerance: f64) -> Result<f64> {
    check_deficit(spec, tolerance)?;
    Ok(linear_entropy_raw(spec))
}

/// Both entropies plus bookkeeping.
pub fn entropies(spec: &SchmidtSpectrum, tolerance: f64) -> Result<EntropyResult> {
    check_deficit(spec, tolerance)?;
    Ok(EntropyResult {
        von_neumann: von_neumann_raw(spec),
        linear: linear_entropy_raw(spec),
        probability_sum: spec.probability_sum(),
        n_m: spec.n_m,
        l_m: spec.l_m,
    })
}
