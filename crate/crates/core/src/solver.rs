//! Overlap/Hamiltonian assembly in the Hylleraas basis, the generalized
//! symmetric eigenproblem `H c = E S c`, and optimization of the nonlinear
//! exponent `alpha`.

use crate::basis::{BasisSet, HylleraasPoint};
use crate::error::{Error, Result};
use crate::quadrature::{build_rule_3d_symmetric, QuadratureOrders, QuadratureRule3D};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Radius used for the effectively unconfined atom.
pub const FREE_RADIUS: f64 = 15.0;

/// Cavity radius in bohr, or the free-atom sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cavity {
    Radius(f64),
    Free,
}

impl Cavity {
    /// Radius actually used by the cutoff factors and the integration domain.
    pub fn radius(&self) -> f64 {
        match *self {
            Cavity::Radius(r) => r,
            Cavity::Free => FREE_RADIUS,
        }
    }
}

impl fmt::Display for Cavity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cavity::Radius(r) => write!(f, "{r}"),
            Cavity::Free => write!(f, "free"),
        }
    }
}

/// Two electrons in a nuclear Coulomb field inside a hard spherical wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub cavity: Cavity,
    /// Nuclear charge.
    pub z: f64,
    /// Whether the electron-electron repulsion `1/r12` is included.
    pub interaction: bool,
}

impl HamiltonianSpec {
    /// Confined helium: `Z = 2`, repulsion on.
    pub fn helium(radius: f64) -> Self {
        Self {
            cavity: Cavity::Radius(radius),
            z: 2.0,
            interaction: true,
        }
    }

    pub fn free_helium() -> Self {
        Self {
            cavity: Cavity::Free,
            z: 2.0,
            interaction: true,
        }
    }

    pub fn radius(&self) -> f64 {
        self.cavity.radius()
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.radius();
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidRadius(r));
        }
        if self.z.is_nan() || self.z < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "nuclear charge must be >= 0, got {}",
                self.z
            )));
        }
        Ok(())
    }
}

/// Numerical settings shared by assembly and the eigen solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Quadrature orders; `None` picks [`QuadratureOrders::for_omega`].
    pub orders: Option<QuadratureOrders>,
    /// Overlap eigenvalues below `overlap_cutoff * largest` are projected out.
    pub overlap_cutoff: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            orders: None,
            overlap_cutoff: 1e-12,
        }
    }
}

impl SolverSettings {
    pub fn orders_for(&self, omega: usize) -> QuadratureOrders {
        self.orders
            .unwrap_or_else(|| QuadratureOrders::for_omega(omega))
    }
}

/// Overlap and Hamiltonian matrices for one `(omega, alpha)`.
#[derive(Debug, Clone)]
pub struct Matrices {
    pub overlap: DMatrix<f64>,
    pub hamiltonian: DMatrix<f64>,
}

const CHUNK: usize = 2048;

struct Partial {
    s: DMatrix<f64>,
    t: DMatrix<f64>,
    v: DMatrix<f64>,
}

impl Partial {
    fn zeros(nb: usize) -> Self {
        Self {
            s: DMatrix::zeros(nb, nb),
            t: DMatrix::zeros(nb, nb),
            v: DMatrix::zeros(nb, nb),
        }
    }

    fn add(mut self, other: Partial) -> Self {
        self.s += other.s;
        self.t += other.t;
        self.v += other.v;
        self
    }
}

fn assemble_chunk(
    basis: &BasisSet,
    alpha: f64,
    spec: &HamiltonianSpec,
    nodes: &[HylleraasPoint],
    weights: &[f64],
) -> Partial {
    let nb = basis.len();
    let radius = spec.radius();
    let k = nodes.len();
    // Columns are quadrature nodes; each column holds the whole basis.
    let mut phi = DMatrix::<f64>::zeros(nb, k);
    let mut g1 = DMatrix::<f64>::zeros(nb, k);
    let mut g2 = DMatrix::<f64>::zeros(nb, k);
    let mut gu = DMatrix::<f64>::zeros(nb, k);
    let (mut v, mut a, mut b, mut c) = (vec![0.0; nb], vec![0.0; nb], vec![0.0; nb], vec![0.0; nb]);
    for (j, &pt) in nodes.iter().enumerate() {
        basis.eval_all(alpha, radius, pt, &mut v, &mut a, &mut b, &mut c);
        phi.column_mut(j).copy_from_slice(&v);
        g1.column_mut(j).copy_from_slice(&a);
        g2.column_mut(j).copy_from_slice(&b);
        gu.column_mut(j).copy_from_slice(&c);
    }

    // Weighted copies.
    let mut w_phi = phi.clone();
    let mut v_phi = phi.clone();
    let mut y = DMatrix::<f64>::zeros(nb, k);
    let mut w_g1 = g1.clone();
    let mut w_g2 = g2.clone();
    let mut w_gu = gu.clone();
    for (j, (&pt, &w)) in nodes.iter().zip(weights).enumerate() {
        let mut pot = -spec.z / pt.r1 - spec.z / pt.r2;
        if spec.interaction {
            pot += 1.0 / pt.u;
        }
        // grad_1 r1 . grad_1 u and its electron-2 counterpart
        let c1 = (pt.r1 * pt.r1 - pt.r2 * pt.r2 + pt.u * pt.u) / (2.0 * pt.r1 * pt.u);
        let c2 = (pt.r2 * pt.r2 - pt.r1 * pt.r1 + pt.u * pt.u) / (2.0 * pt.r2 * pt.u);
        w_phi.column_mut(j).scale_mut(w);
        v_phi.column_mut(j).scale_mut(w * pot);
        w_g1.column_mut(j).scale_mut(0.5 * w);
        w_g2.column_mut(j).scale_mut(0.5 * w);
        w_gu.column_mut(j).scale_mut(w);
        let mut yc = y.column_mut(j);
        yc.axpy(0.5 * w * c1, &g1.column(j), 0.0);
        yc.axpy(0.5 * w * c2, &g2.column(j), 1.0);
    }

    let mut out = Partial::zeros(nb);
    out.s.gemm(1.0, &phi, &w_phi.transpose(), 0.0);
    out.v.gemm(1.0, &phi, &v_phi.transpose(), 0.0);
    // T = 1/2 sum w [g1 g1' + g2 g2' + 2 gu gu' + (c1 g1 + c2 g2) gu' + gu (c1 g1 + c2 g2)']
    out.t.gemm(1.0, &g1, &w_g1.transpose(), 0.0);
    out.t.gemm(1.0, &g2, &w_g2.transpose(), 1.0);
    out.t.gemm(1.0, &gu, &w_gu.transpose(), 1.0);
    let cross = &y * gu.transpose();
    out.t += &cross;
    out.t += cross.transpose();
    out
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

fn check_rule(spec: &HamiltonianSpec, rule: &QuadratureRule3D) -> Result<()> {
    spec.validate()?;
    if (rule.radius - spec.radius()).abs() > 1e-12 * spec.radius() {
        return Err(Error::InvalidArgument(format!(
            "quadrature rule radius {} does not match cavity radius {}",
            rule.radius,
            spec.radius()
        )));
    }
    Ok(())
}

/// Assembles both matrices in one pass over the quadrature nodes.
pub fn assemble(
    basis: &BasisSet,
    alpha: f64,
    spec: &HamiltonianSpec,
    rule: &QuadratureRule3D,
) -> Result<Matrices> {
    check_rule(spec, rule)?;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let nb = basis.len();
    let total = rule
        .nodes
        .par_chunks(CHUNK)
        .zip(rule.weights.par_chunks(CHUNK))
        .map(|(n, w)| assemble_chunk(basis, alpha, spec, n, w))
        .collect::<Vec<_>>()
        .into_iter()
        // fixed summation order keeps results bit-identical across thread counts
        .fold(Partial::zeros(nb), Partial::add);
    let mut overlap = total.s;
    let mut hamiltonian = total.t + total.v;
    symmetrize(&mut overlap);
    symmetrize(&mut hamiltonian);
    Ok(Matrices {
        overlap,
        hamiltonian,
    })
}

/// `S_ij = <phi_i | phi_j>` over the confined domain.
pub fn build_overlap(
    basis: &BasisSet,
    alpha: f64,
    spec: &HamiltonianSpec,
    rule: &QuadratureRule3D,
) -> Result<DMatrix<f64>> {
    Ok(assemble(basis, alpha, spec, rule)?.overlap)
}

/// `H_ij = <phi_i | H | phi_j>` with the kinetic part in gradient form.
pub fn build_hamiltonian(
    basis: &BasisSet,
    alpha: f64,
    spec: &HamiltonianSpec,
    rule: &QuadratureRule3D,
) -> Result<DMatrix<f64>> {
    Ok(assemble(basis, alpha, spec, rule)?.hamiltonian)
}

// Canonical orthogonalization of the unit-diagonal-scaled overlap matrix.
// Returns (transform X with X' S X = 1, dropped count).
fn orthogonalizer(s: &DMatrix<f64>, cutoff: f64) -> Result<(DMatrix<f64>, usize)> {
    let n = s.nrows();
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let sii = s[(i, i)];
            if sii > 0.0 {
                Ok(1.0 / sii.sqrt())
            } else {
                Err(Error::NotPositiveDefinite {
                    value: sii,
                    largest: sii.abs(),
                })
            }
        })
        .collect::<Result<_>>()?;
    let scaled = DMatrix::from_fn(n, n, |i, j| d[i] * s[(i, j)] * d[j]);
    let eig = SymmetricEigen::try_new(scaled, 1e-15, 0)
        .ok_or_else(|| Error::Eigensolver("overlap diagonalization did not converge".into()))?;
    let largest = eig.eigenvalues.max();
    let smallest = eig.eigenvalues.min();
    if smallest < -1e-8 * largest {
        return Err(Error::NotPositiveDefinite {
            value: smallest,
            largest,
        });
    }
    let keep: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > cutoff * largest)
        .collect();
    let mut x = DMatrix::zeros(n, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        let scale = 1.0 / eig.eigenvalues[k].sqrt();
        for r in 0..n {
            x[(r, c)] = d[r] * eig.eigenvectors[(r, k)] * scale;
        }
    }
    Ok((x, n - keep.len()))
}

/// All eigenvalues (ascending) of the pencil `(H, S)` after the overlap
/// conditioning filter.
pub fn generalized_eigenvalues(
    h: &DMatrix<f64>,
    s: &DMatrix<f64>,
    cutoff: f64,
) -> Result<Vec<f64>> {
    let (x, _) = orthogonalizer(s, cutoff)?;
    let mut reduced = x.transpose() * h * &x;
    symmetrize(&mut reduced);
    let mut vals: Vec<f64> = reduced.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Lowest eigenpair of `H c = E S c`, with `c' S c = 1`.
pub fn solve_generalized(
    h: &DMatrix<f64>,
    s: &DMatrix<f64>,
    cutoff: f64,
) -> Result<(f64, DVector<f64>)> {
    if h.shape() != s.shape() || !h.is_square() {
        return Err(Error::InvalidArgument(
            "H and S must be square and of equal size".into(),
        ));
    }
    let (x, _) = orthogonalizer(s, cutoff)?;
    if x.ncols() == 0 {
        return Err(Error::NotPositiveDefinite {
            value: 0.0,
            largest: 0.0,
        });
    }
    let mut reduced = x.transpose() * h * &x;
    symmetrize(&mut reduced);
    let eig = SymmetricEigen::try_new(reduced, 1e-15, 0)
        .ok_or_else(|| Error::Eigensolver("reduced Hamiltonian did not converge".into()))?;
    let (imin, &emin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    let mut c = &x * eig.eigenvectors.column(imin);
    let norm = (c.transpose() * s * &c)[(0, 0)];
    c /= norm.sqrt();
    // fix the sign so the largest component is positive
    let imax = c.iamax();
    if c[imax] < 0.0 {
        c.neg_mut();
    }
    Ok((emin, c))
}

/// Converged variational ground state for one `(omega, alpha)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariationalState {
    pub spec: HamiltonianSpec,
    pub basis: BasisSet,
    pub alpha: f64,
    pub coeffs: Vec<f64>,
    pub energy: f64,
    /// `<psi|psi>` of the finalized coefficients.
    pub norm: f64,
}

impl VariationalState {
    pub fn omega(&self) -> usize {
        self.basis.omega()
    }

    pub fn radius(&self) -> f64 {
        self.spec.radius()
    }
}

/// Solves at fixed `(omega, alpha)`, returning a normalized state.
pub fn solve_at_alpha(
    omega: usize,
    alpha: f64,
    spec: &HamiltonianSpec,
    settings: &SolverSettings,
) -> Result<VariationalState> {
    let basis = BasisSet::new(omega);
    let rule = build_rule_3d_symmetric(spec.radius(), settings.orders_for(omega))?;
    solve_with_rule(&basis, alpha, spec, &rule, settings)
}

fn solve_with_rule(
    basis: &BasisSet,
    alpha: f64,
    spec: &HamiltonianSpec,
    rule: &QuadratureRule3D,
    settings: &SolverSettings,
) -> Result<VariationalState> {
    let m = assemble(basis, alpha, spec, rule)?;
    let (energy, c) = solve_generalized(&m.hamiltonian, &m.overlap, settings.overlap_cutoff)?;
    let norm = (c.transpose() * &m.overlap * &c)[(0, 0)];
    Ok(VariationalState {
        spec: *spec,
        basis: basis.clone(),
        alpha,
        coeffs: c.iter().copied().collect(),
        energy,
        norm,
    })
}

/// Grid spacing of the coarse `alpha` scan.
pub const ALPHA_GRID_STEP: f64 = 0.1;
/// Final bracket width of the golden-section refinement.
pub const ALPHA_TOLERANCE: f64 = 1e-3;
/// Default `alpha` search interval.
pub const DEFAULT_ALPHA_RANGE: (f64, f64) = (0.2, 4.0);

/// Minimizes the ground-state energy over `alpha` in `[lo, hi]`.
///
/// A coarse scan with step [`ALPHA_GRID_STEP`] locates the minimum, then
/// golden-section search narrows the bracket around it to
/// [`ALPHA_TOLERANCE`]. A coarse minimum on either end of the range is
/// reported as [`Error::AlphaAtBoundary`].
pub fn optimize_alpha(
    omega: usize,
    spec: &HamiltonianSpec,
    range: (f64, f64),
    settings: &SolverSettings,
) -> Result<VariationalState> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "alpha range must satisfy 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    let basis = BasisSet::new(omega);
    let rule = build_rule_3d_symmetric(spec.radius(), settings.orders_for(omega))?;
    let energy_at = |a: f64| -> Result<f64> {
        let m = assemble(&basis, a, spec, &rule)?;
        Ok(solve_generalized(&m.hamiltonian, &m.overlap, settings.overlap_cutoff)?.0)
    };

    let steps = ((hi - lo) / ALPHA_GRID_STEP + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=steps)
        .map(|i| lo + i as f64 * ALPHA_GRID_STEP)
        .collect();
    if hi - grid[grid.len() - 1] > 1e-9 {
        grid.push(hi);
    }
    let energies: Vec<f64> = grid
        .par_iter()
        .map(|&a| energy_at(a))
        .collect::<Result<_>>()?;
    let imin = energies
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    if imin == 0 || imin == grid.len() - 1 {
        return Err(Error::AlphaAtBoundary {
            alpha: grid[imin],
            lo,
            hi,
        });
    }

    let (best_alpha, _) = golden_section(
        grid[imin - 1],
        grid[imin + 1],
        (grid[imin], energies[imin]),
        ALPHA_TOLERANCE,
        &energy_at,
    )?;
    solve_with_rule(&basis, best_alpha, spec, &rule, settings)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
///
/// `known` is an already-evaluated interior point kept as a candidate.
/// Returns the best abscissa seen and its value.
pub fn golden_section<F>(
    mut a: f64,
    mut b: f64,
    known: (f64, f64),
    tol: f64,
    f: &F,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut best = known;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for (x, fx) in [(x1, f1), (x2, f2)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::build_rule_3d;
    use std::f64::consts::PI;

    #[test]
    fn identity_pencil() {
        let s = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0]);
        let vals = generalized_eigenvalues(&s, &s, 1e-12).unwrap();
        for v in vals {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_pencil() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0]));
        let s = DMatrix::identity(2, 2);
        let (e, c) = solve_generalized(&h, &s, 1e-12).unwrap();
        assert!((e - 1.0).abs() < 1e-14);
        assert!((c[0].abs() - 1.0).abs() < 1e-14 && c[1].abs() < 1e-14);
    }

    #[test]
    fn synthesized_pencil_recovers_spectrum() {
        // S = B B', H = B Q diag(lambda) Q' B' gives eigenvalues lambda.
        let n = 6;
        let b = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0 + i as f64 * 0.1
            } else {
                0.3 / (1.0 + (i + 2 * j) as f64)
            }
        });
        let q = {
            let raw = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64).sin());
            raw.qr().q()
        };
        let lambda = [-2.5, -1.0, 0.25, 0.5, 3.0, 7.0];
        let s = &b * b.transpose();
        let h = &b
            * &q
            * DMatrix::from_diagonal(&DVector::from_row_slice(&lambda))
            * q.transpose()
            * b.transpose();
        let vals = generalized_eigenvalues(&h, &s, 1e-14).unwrap();
        for (v, l) in vals.iter().zip(lambda) {
            assert!((v - l).abs() < 1e-12, "{v} vs {l}");
        }
        let (e, c) = solve_generalized(&h, &s, 1e-14).unwrap();
        assert!((e + 2.5).abs() < 1e-12);
        assert!(((c.transpose() * &s * &c)[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matrices_are_symmetric_and_match_full_rule() {
        let basis = BasisSet::new(2);
        let spec = HamiltonianSpec::helium(2.0);
        let half = build_rule_3d_symmetric(2.0, QuadratureOrders::new(16, 16, 6)).unwrap();
        let full = build_rule_3d(2.0, QuadratureOrders::new(16, 16, 6)).unwrap();
        let a = assemble(&basis, 1.5, &spec, &half).unwrap();
        let b = assemble(&basis, 1.5, &spec, &full).unwrap();
        for i in 0..basis.len() {
            assert!(a.overlap[(0, 0)] > 0.0);
            for j in 0..basis.len() {
                let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1e-300);
                assert!(rel(a.overlap[(i, j)], a.overlap[(j, i)]) <= 1e-14);
                assert!(rel(a.hamiltonian[(i, j)], a.hamiltonian[(j, i)]) <= 1e-12);
                assert!(rel(a.overlap[(i, j)], b.overlap[(i, j)]) <= 1e-12);
                assert!(rel(a.hamiltonian[(i, j)], b.hamiltonian[(i, j)]) <= 1e-11);
            }
        }
    }

    #[test]
    fn overlap_of_single_function_matches_direct_integral() {
        // S_00 for (R - r1)^2 (R - r2)^2 e^{-2 alpha s} factorizes into (4 pi int r^2 (R-r)^2 e^{-2 alpha r} dr)^2
        let (radius, alpha) = (1.5, 0.9);
        let basis = BasisSet::new(0);
        let rule = build_rule_3d_symmetric(radius, QuadratureOrders::new(20, 20, 3)).unwrap();
        let s = build_overlap(&basis, alpha, &HamiltonianSpec::helium(radius), &rule).unwrap();
        let g = crate::quadrature::GaussLegendre::new(30);
        let one = 4.0
            * PI
            * g.integrate(0.0, radius, |r| {
                r * r * (radius - r).powi(2) * (-2.0 * alpha * r).exp()
            });
        assert!(((s[(0, 0)] - one * one) / (one * one)).abs() < 1e-13);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let f = |x: f64| -> Result<f64> { Ok((x - 1.2345).powi(2)) };
        let (x, _) = golden_section(1.0, 1.5, (1.2, f(1.2).unwrap()), 1e-6, &f).unwrap();
        assert!((x - 1.2345).abs() < 1e-6);
    }

    #[test]
    fn boundary_minimum_is_reported() {
        let spec = HamiltonianSpec::helium(3.0);
        let err = optimize_alpha(1, &spec, (2.6, 3.0), &SolverSettings::default()).unwrap_err();
        assert!(matches!(err, Error::AlphaAtBoundary { .. }), "{err}");
        assert!(optimize_alpha(1, &spec, (0.0, 1.0), &SolverSettings::default()).is_err());
    }
}
