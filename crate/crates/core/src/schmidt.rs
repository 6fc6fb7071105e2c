//! Radial kernels `f_l(r, r')` of the two-electron wavefunction and the
//! Schmidt coefficients they generate.
//!
//! The S-state wavefunction expands as `psi = sum_l g_l(r1, r2) P_l(cos theta)`.
//! With `f_l = r1 r2 g_l` the integral operator on `[0, R]` with kernel `f_l`
//! has eigenvalues `k_nl`; each contributes `2l+1` degenerate eigenvalues
//! `lambda_nl = (4 pi k_nl / (2l+1))^2` of the one-particle reduced density
//! matrix.

use crate::basis::HylleraasPoint;
use crate::error::{Error, Result};
use crate::quadrature::{legendre_table, GaussLegendre};
use crate::solver::VariationalState;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{BufRead, Write};

/// Default number of angle nodes per radial pair.
pub const DEFAULT_ANGLE_NODES: usize = 64;
/// Default Nystrom grid size.
pub const DEFAULT_NM: usize = 301;
/// Default angular cutoff.
pub const DEFAULT_LMAX: usize = 18;

/// Fast evaluator of a finalized wavefunction.
///
/// Coefficients are grouped by the power of `u`, so one call costs one pass
/// over the basis plus a short Horner sum in `u`.
#[derive(Debug, Clone)]
pub struct PsiEvaluator {
    radius: f64,
    alpha: f64,
    omega: usize,
    // by_p[p] = list of (n, 2m, c)
    by_p: Vec<Vec<(usize, usize, f64)>>,
}

impl PsiEvaluator {
    pub fn new(state: &VariationalState) -> Self {
        let omega = state.omega();
        let mut by_p = vec![Vec::new(); omega + 1];
        for (idx, &c) in state.basis.indices().iter().zip(&state.coeffs) {
            by_p[idx.p].push((idx.n, 2 * idx.m, c));
        }
        Self {
            radius: state.radius(),
            alpha: state.alpha,
            omega,
            by_p,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Value at a Hylleraas point.
    pub fn eval(&self, pt: HylleraasPoint) -> f64 {
        let b = self.polynomial_parts(pt.r1, pt.r2);
        self.prefactor(pt.r1, pt.r2) * horner(&b, pt.u)
    }

    // (R - r1)(R - r2) exp(-alpha s)
    fn prefactor(&self, r1: f64, r2: f64) -> f64 {
        (self.radius - r1) * (self.radius - r2) * (-self.alpha * (r1 + r2)).exp()
    }

    // B_p(r1, r2) = sum c s^n t^(2m) over terms with u-power p
    fn polynomial_parts(&self, r1: f64, r2: f64) -> Vec<f64> {
        let s = r1 + r2;
        let t = r1 - r2;
        let mut sp = vec![1.0; self.omega + 1];
        let mut tp = vec![1.0; 2 * self.omega + 1];
        for k in 1..sp.len() {
            sp[k] = sp[k - 1] * s;
        }
        for k in 1..tp.len() {
            tp[k] = tp[k - 1] * t;
        }
        self.by_p
            .iter()
            .map(|terms| terms.iter().map(|&(n, m2, c)| c * sp[n] * tp[m2]).sum())
            .collect()
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// `psi(r1, r2, cos theta)` of a variational state.
pub fn evaluate_psi(state: &VariationalState, r1: f64, r2: f64, cos_theta: f64) -> f64 {
    PsiEvaluator::new(state).eval(HylleraasPoint::from_angle(r1, r2, cos_theta))
}

/// `f_l(r1, r2)` for `l = 0..out.len()`.
///
/// Uses the `u`-adapted angle rule of [`crate::quadrature::AngleRule::for_pair`], so the
/// projection is exact once the number of nodes exceeds
/// `l + (omega + 1) / 2`.
pub fn kernel_values(psi: &PsiEvaluator, base: &GaussLegendre, r1: f64, r2: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let pre = psi.prefactor(r1, r2);
    if r1 <= 0.0 || r2 <= 0.0 || pre == 0.0 {
        return;
    }
    let b = psi.polynomial_parts(r1, r2);
    let inv = 1.0 / (r1 * r2);
    let mut pl = vec![0.0; out.len()];
    // same nodes as AngleRule::for_pair, keeping u exact instead of
    // recovering it from t
    for (u, w) in base.mapped((r1 - r2).abs(), r1 + r2) {
        let t = ((r1 * r1 + r2 * r2 - u * u) * 0.5 * inv).clamp(-1.0, 1.0);
        let v = w * u * inv * horner(&b, u);
        legendre_table(t, &mut pl);
        for (o, p) in out.iter_mut().zip(&pl) {
            *o += v * p;
        }
    }
    for (l, o) in out.iter_mut().enumerate() {
        *o *= r1 * r2 * pre * 0.5 * (2 * l + 1) as f64;
    }
}

/// `f_l` sampled on the uniform grid `r_i = i R / (n_m - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialKernel {
    pub l: usize,
    pub radius: f64,
    pub values: DMatrix<f64>,
}

impl RadialKernel {
    pub fn n_m(&self) -> usize {
        self.values.nrows()
    }

    pub fn step(&self) -> f64 {
        self.radius / (self.n_m() - 1) as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.n_m()).map(|i| i as f64 * h).collect()
    }
}

fn check_grid(n_m: usize, angle_nodes: usize) -> Result<()> {
    if n_m < 3 {
        return Err(Error::InvalidArgument(format!(
            "n_m must be >= 3, got {n_m}"
        )));
    }
    if angle_nodes < 1 {
        return Err(Error::InvalidArgument(
            "angle rule needs at least one node".into(),
        ));
    }
    Ok(())
}

/// Kernels for `l = 0..=l_max` on the same grid.
///
/// The wavefunction is evaluated once per `(i, j, node)` and reused for
/// every `l`.
pub fn build_kernels(
    state: &VariationalState,
    l_max: usize,
    n_m: usize,
    angle_nodes: usize,
) -> Result<Vec<RadialKernel>> {
    check_grid(n_m, angle_nodes)?;
    let psi = PsiEvaluator::new(state);
    let base = GaussLegendre::new(angle_nodes);
    let radius = state.radius();
    let h = radius / (n_m - 1) as f64;
    let nl = l_max + 1;

    // rows[i] holds f_l(r_i, r_j) for j <= i, laid out as [j][l]
    let rows: Vec<Vec<f64>> = (0..n_m)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; (i + 1) * nl];
            for j in 0..=i {
                kernel_values(
                    &psi,
                    &base,
                    i as f64 * h,
                    j as f64 * h,
                    &mut row[j * nl..(j + 1) * nl],
                );
            }
            row
        })
        .collect();

    Ok((0..nl)
        .map(|l| {
            let mut values = DMatrix::zeros(n_m, n_m);
            for (i, row) in rows.iter().enumerate() {
                for j in 0..=i {
                    let v = row[j * nl + l];
                    values[(i, j)] = v;
                    values[(j, i)] = v;
                }
            }
            RadialKernel { l, radius, values }
        })
        .collect())
}

/// Kernel for one angular momentum.
pub fn build_kernel(
    state: &VariationalState,
    l: usize,
    n_m: usize,
    angle_nodes: usize,
) -> Result<RadialKernel> {
    let mut all = build_kernels(state, l, n_m, angle_nodes)?;
    Ok(all.pop().expect("l_max + 1 kernels"))
}

fn sort_by_magnitude(mut k: Vec<f64>) -> Vec<f64> {
    k.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    k
}

/// Eigenvalues of `dr * f_l(r_i, r_j)`, ordered by decreasing `|k|`.
pub fn nystrom_spectrum(kernel: &RadialKernel) -> Vec<f64> {
    let m = &kernel.values * kernel.step();
    sort_by_magnitude(m.symmetric_eigenvalues().iter().copied().collect())
}

/// Nystrom eigenvalues with the eigenvectors `v_nl(r_i)` as columns, in the
/// same order. Eigenvectors are normalized so that `dr * sum v^2 = 1`.
pub fn nystrom_orbitals(kernel: &RadialKernel) -> (Vec<f64>, DMatrix<f64>) {
    let h = kernel.step();
    let eig = SymmetricEigen::new(&kernel.values * h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .total_cmp(&eig.eigenvalues[a].abs())
    });
    let n = kernel.n_m();
    let mut vecs = DMatrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        vecs.set_column(c, &(eig.eigenvectors.column(k) / h.sqrt()));
    }
    (order.iter().map(|&k| eig.eigenvalues[k]).collect(), vecs)
}

/// Settings of the sine-basis projection route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineSettings {
    /// Number of sine functions `sqrt(2/R) sin(i pi r / R)`, `i = 1..=n`.
    pub functions: usize,
    /// Gauss points along the outer radial direction and along the
    /// triangle-mapped inner one.
    pub radial_nodes: usize,
    pub angle_nodes: usize,
}

impl SineSettings {
    pub fn new(functions: usize) -> Self {
        Self {
            functions,
            radial_nodes: 2 * functions + 60,
            angle_nodes: DEFAULT_ANGLE_NODES,
        }
    }
}

/// Eigenvalues of `<u_i | f_l | u_j>` in the orthonormal sine basis, for
/// `l = 0..=l_max`, each ordered by decreasing `|k|`.
///
/// The double integral is split along `r1 = r2`, where `f_l` is not smooth,
/// and each triangle is integrated with mapped Gauss–Legendre rules.
pub fn sine_basis_spectra(
    state: &VariationalState,
    l_max: usize,
    settings: &SineSettings,
) -> Result<Vec<Vec<f64>>> {
    if settings.functions == 0 || settings.radial_nodes < 2 {
        return Err(Error::InvalidArgument(
            "sine route needs functions >= 1 and radial_nodes >= 2".into(),
        ));
    }
    check_grid(3, settings.angle_nodes)?;
    let psi = PsiEvaluator::new(state);
    let base = GaussLegendre::new(settings.angle_nodes);
    let g = GaussLegendre::new(settings.radial_nodes);
    let radius = state.radius();
    let nl = l_max + 1;
    let ns = settings.functions;
    let norm = (2.0 / radius).sqrt();

    let outer: Vec<(f64, f64)> = g.mapped(0.0, radius).collect();
    let inner: Vec<(f64, f64)> = g.mapped(0.0, 1.0).collect();

    // For each outer node r_>: z_l = sum_inner w f_l(r_>, r_<) u(r_<), then
    // M_l += u(r_>) z_l' + z_l u(r_>)'.
    let partials: Vec<Vec<DMatrix<f64>>> = outer
        .par_iter()
        .map(|&(big, w_big)| {
            let mut ub = vec![0.0; ns];
            sine_table(PI * big / radius, norm, &mut ub);
            let mut z = DMatrix::<f64>::zeros(ns, nl);
            let mut f = vec![0.0; nl];
            let mut us = vec![0.0; ns];
            for &(x, w_x) in &inner {
                let small = x * big;
                kernel_values(&psi, &base, big, small, &mut f);
                sine_table(PI * small / radius, norm, &mut us);
                let w = w_big * w_x * big;
                for (l, fl) in f.iter().enumerate() {
                    let wf = w * fl;
                    for (zi, ui) in z.column_mut(l).iter_mut().zip(&us) {
                        *zi += wf * ui;
                    }
                }
            }
            let ubv = DVector::from_vec(ub);
            (0..nl)
                .map(|l| {
                    let zl = z.column(l);
                    let outer_prod = &ubv * zl.transpose();
                    &outer_prod + outer_prod.transpose()
                })
                .collect()
        })
        .collect();

    let mut spectra = Vec::with_capacity(nl);
    for l in 0..nl {
        let mut m = DMatrix::zeros(ns, ns);
        for p in &partials {
            m += &p[l];
        }
        spectra.push(sort_by_magnitude(
            m.symmetric_eigenvalues().iter().copied().collect(),
        ));
    }
    Ok(spectra)
}

/// Sine-basis eigenvalues for one `l`.
pub fn sine_basis_spectrum(
    state: &VariationalState,
    l: usize,
    settings: &SineSettings,
) -> Result<Vec<f64>> {
    Ok(sine_basis_spectra(state, l, settings)?
        .pop()
        .expect("l_max + 1 spectra"))
}

// out[i] = norm * sin((i + 1) x) by the Chebyshev recurrence
fn sine_table(x: f64, norm: f64, out: &mut [f64]) {
    let c2 = 2.0 * x.cos();
    let (mut prev, mut cur) = (0.0, x.sin());
    for o in out.iter_mut() {
        *o = norm * cur;
        let next = c2 * cur - prev;
        prev = cur;
        cur = next;
    }
}

/// `lambda = (4 pi k / (2l + 1))^2`.
pub fn lambda_from_k(k: f64, l: usize) -> f64 {
    let a = 4.0 * PI * k / (2 * l + 1) as f64;
    a * a
}

pub fn lambdas_from_k(k: &[f64], l: usize) -> Vec<f64> {
    k.iter().map(|&v| lambda_from_k(v, l)).collect()
}

/// One radial Schmidt eigenvalue, carrying the `2l+1` degeneracy implicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchmidtEntry {
    pub n: usize,
    pub l: usize,
    pub lambda: f64,
}

impl SchmidtEntry {
    pub fn weight(&self) -> f64 {
        (2 * self.l + 1) as f64
    }
}

/// Truncated Schmidt spectrum `{(n, l, lambda_nl)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub entries: Vec<SchmidtEntry>,
    pub n_m: usize,
    pub l_m: usize,
}

impl SchmidtSpectrum {
    /// Builds the spectrum from per-`l` coefficient lists (`ks[l]`).
    pub fn from_k(ks: &[Vec<f64>], n_m: usize) -> Self {
        let mut entries = Vec::new();
        for (l, k) in ks.iter().enumerate() {
            let mut lam = lambdas_from_k(k, l);
            lam.sort_by(|a, b| b.total_cmp(a));
            entries.extend(lam.into_iter().enumerate().map(|(n, lambda)| SchmidtEntry {
                n,
                l,
                lambda,
            }));
        }
        Self {
            entries,
            n_m,
            l_m: ks.len().saturating_sub(1),
        }
    }

    /// Builds a spectrum directly from entries (cutoffs taken from them).
    pub fn from_entries(entries: Vec<SchmidtEntry>) -> Self {
        let n_m = entries.iter().map(|e| e.n + 1).max().unwrap_or(0);
        let l_m = entries.iter().map(|e| e.l).max().unwrap_or(0);
        Self { entries, n_m, l_m }
    }

    /// `sum (2l+1) lambda`.
    pub fn probability_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.weight() * e.lambda).sum()
    }

    pub fn deficit(&self) -> f64 {
        1.0 - self.probability_sum()
    }

    /// Largest `lambda` values regardless of `l`, in decreasing order.
    pub fn largest(&self, count: usize) -> Vec<f64> {
        let mut all: Vec<f64> = self.entries.iter().map(|e| e.lambda).collect();
        all.sort_by(|a, b| b.total_cmp(a));
        all.truncate(count);
        all
    }

    /// Copy restricted to `l <= l_max`.
    pub fn truncated(&self, l_max: usize) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|e| e.l <= l_max)
                .collect(),
            n_m: self.n_m,
            l_m: self.l_m.min(l_max),
        }
    }
}

/// Nystrom route end to end: kernels for `l = 0..=l_m` and their spectrum.
pub fn schmidt_spectrum(
    state: &VariationalState,
    n_m: usize,
    l_m: usize,
    angle_nodes: usize,
) -> Result<SchmidtSpectrum> {
    let kernels = build_kernels(state, l_m, n_m, angle_nodes)?;
    let ks: Vec<Vec<f64>> = kernels.par_iter().map(nystrom_spectrum).collect();
    Ok(SchmidtSpectrum::from_k(&ks, n_m))
}

/// Sine route end to end.
pub fn schmidt_spectrum_sine(
    state: &VariationalState,
    l_m: usize,
    settings: &SineSettings,
) -> Result<SchmidtSpectrum> {
    let ks = sine_basis_spectra(state, l_m, settings)?;
    Ok(SchmidtSpectrum::from_k(&ks, settings.functions))
}

/// Writes a kernel and its Nystrom coefficients as a self-describing text
/// matrix: `#`-prefixed header (`R`, `l`, `n_m`), then `n_m` rows of values,
/// then one `# k` line per coefficient.
pub fn write_kernel_dump<W: Write>(mut w: W, kernel: &RadialKernel, k: &[f64]) -> Result<()> {
    writeln!(w, "# radial kernel f_l(r_i, r_j)")?;
    writeln!(w, "# R = {:.17e}", kernel.radius)?;
    writeln!(w, "# l = {}", kernel.l)?;
    writeln!(w, "# n_m = {}", kernel.n_m())?;
    for i in 0..kernel.n_m() {
        let row: Vec<String> = (0..kernel.n_m())
            .map(|j| format!("{:.17e}", kernel.values[(i, j)]))
            .collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    for v in k {
        writeln!(w, "# k {v:.17e}")?;
    }
    Ok(())
}

/// Reads the format produced by [`write_kernel_dump`].
pub fn read_kernel_dump<R: BufRead>(r: R) -> Result<(RadialKernel, Vec<f64>)> {
    let mut radius = None;
    let mut l = None;
    let mut n_m = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut k = Vec::new();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
    };
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("R =") {
                radius = Some(num(v)?);
            } else if let Some(v) = rest.strip_prefix("l =") {
                l = Some(
                    v.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(e.to_string()))?,
                );
            } else if let Some(v) = rest.strip_prefix("n_m =") {
                n_m = Some(
                    v.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(e.to_string()))?,
                );
            } else if let Some(v) = rest.strip_prefix("k ") {
                k.push(num(v)?);
            }
            continue;
        }
        rows.push(line.split_whitespace().map(num).collect::<Result<_>>()?);
    }
    let (radius, l, n_m) = match (radius, l, n_m) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::Parse("kernel dump header is incomplete".into())),
    };
    if rows.len() != n_m || rows.iter().any(|r| r.len() != n_m) {
        return Err(Error::Parse(format!("expected a {n_m}x{n_m} matrix")));
    }
    let values = DMatrix::from_fn(n_m, n_m, |i, j| rows[i][j]);
    Ok((RadialKernel { l, radius, values }, k))
}
