//! Hylleraas-type basis with hard-wall cutoff factors.
//!
//! Every basis function has the form
//!
//! ```text
//! phi_nmp(r1, r2, u) = (R - r1)(R - r2) exp(-alpha s) s^n t^(2m) u^p
//! ```
//!
//! with `s = r1 + r2`, `t = r1 - r2` and `u` the inter-electron distance. Only even powers of `t` occur, so every function is symmetric
//! under electron exchange. Derivatives are reported in `(r1, r2, u)`.

use serde::{Deserialize, Serialize};

/// Exponent triple `(n, m, p)` of a single term `s^n t^(2m) u^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisIndex {
    pub n: usize,
    pub m: usize,
    pub p: usize,
}

impl BasisIndex {
    pub const fn new(n: usize, m: usize, p: usize) -> Self {
        Self { n, m, p }
    }

    pub const fn degree(&self) -> usize {
        self.n + self.m + self.p
    }
}

/// A two-electron S-state configuration in Hylleraas coordinates (bohr).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HylleraasPoint {
    pub r1: f64,
    pub r2: f64,
    pub u: f64,
}

impl HylleraasPoint {
    pub const fn new(r1: f64, r2: f64, u: f64) -> Self {
        Self { r1, r2, u }
    }

    /// Builds the point from radii and `cos(theta)` between the position vectors.
    pub fn from_angle(r1: f64, r2: f64, cos_theta: f64) -> Self {
        let u2 = (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * cos_theta).max(0.0);
        Self {
            r1,
            r2,
            u: u2.sqrt(),
        }
    }

    pub fn s(&self) -> f64 {
        self.r1 + self.r2
    }

    pub fn t(&self) -> f64 {
        self.r1 - self.r2
    }

    pub fn cos_theta(&self) -> f64 {
        (self.r1 * self.r1 + self.r2 * self.r2 - self.u * self.u) / (2.0 * self.r1 * self.r2)
    }

    pub fn swapped(&self) -> Self {
        Self {
            r1: self.r2,
            r2: self.r1,
            u: self.u,
        }
    }

    /// Checks the confinement box and the triangle condition, with slack `tol`.
    pub fn is_valid(&self, radius: f64, tol: f64) -> bool {
        let in_box = |r: f64| r >= -tol && r <= radius + tol;
        in_box(self.r1)
            && in_box(self.r2)
            && self.u >= (self.r1 - self.r2).abs() - tol
            && self.u <= self.r1 + self.r2 + tol
    }
}

/// Value of a basis function together with its first derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BasisValue {
    pub value: f64,
    pub d_r1: f64,
    pub d_r2: f64,
    pub d_u: f64,
}

/// All triples with `n + m + p <= omega` in graded lexicographic order.
///
/// Within one total degree `d` the order is by descending `n`, then
/// descending `m`, so `omega = 1` yields `(0,0,0), (1,0,0), (0,1,0), (0,0,1)`.
pub fn enumerate_basis(omega: usize) -> Vec<BasisIndex> {
    let mut out = Vec::with_capacity(basis_len(omega));
    for d in 0..=omega {
        for n in (0..=d).rev() {
            for m in (0..=d - n).rev() {
                out.push(BasisIndex::new(n, m, d - n - m));
            }
        }
    }
    out
}

/// Number of basis functions of order `omega`.
pub const fn basis_len(omega: usize) -> usize {
    (omega + 1) * (omega + 2) * (omega + 3) / 6
}

// x^k with the derivative-friendly convention 0^0 = 1.
#[inline]
fn pow(x: f64, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        x.powi(k as i32)
    }
}

// k * x^(k-1), zero for k = 0 regardless of x.
#[inline]
fn dpow(x: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * pow(x, k - 1)
    }
}

/// Evaluates one basis function and its analytic gradient in `(r1, r2, u)`.
pub fn eval_basis(idx: BasisIndex, alpha: f64, radius: f64, pt: HylleraasPoint) -> BasisValue {
    let s = pt.s();
    let t = pt.t();
    let c1 = radius - pt.r1;
    let c2 = radius - pt.r2;
    let e = (-alpha * s).exp();

    let sn = pow(s, idx.n);
    let tm = pow(t, 2 * idx.m);
    let up = pow(pt.u, idx.p);
    let poly = sn * tm * up;

    let dp_ds = dpow(s, idx.n) * tm * up;
    let dp_dt = sn * dpow(t, 2 * idx.m) * up;
    let dp_du = sn * tm * dpow(pt.u, idx.p);

    let cut = c1 * c2;
    let value = cut * e * poly;
    // d/dr1 = d/ds + d/dt, d/dr2 = d/ds - d/dt
    let inner_r1 = -alpha * poly + dp_ds + dp_dt;
    let inner_r2 = -alpha * poly + dp_ds - dp_dt;
    BasisValue {
        value,
        d_r1: e * (-c2 * poly + cut * inner_r1),
        d_r2: e * (-c1 * poly + cut * inner_r2),
        d_u: cut * e * dp_du,
    }
}

/// The ordered set of basis functions of one expansion order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSet {
    omega: usize,
    indices: Vec<BasisIndex>,
}

impl BasisSet {
    /// Panics for `omega > 30`, far beyond what double precision can use.
    pub fn new(omega: usize) -> Self {
        assert!(omega <= 30, "basis order {omega} is out of range");
        Self {
            omega,
            indices: enumerate_basis(omega),
        }
    }

    pub fn omega(&self) -> usize {
        self.omega
    }

    pub fn indices(&self) -> &[BasisIndex] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Evaluates every basis function at `pt`, writing values and gradients
    /// into the four output slices (each of length `self.len()`).
    ///
    /// Equivalent to calling [`eval_basis`] per index but shares the power
    /// tables across the whole set.
    #[allow(clippy::too_many_arguments)]
    pub fn eval_all(
        &self,
        alpha: f64,
        radius: f64,
        pt: HylleraasPoint,
        value: &mut [f64],
        d_r1: &mut [f64],
        d_r2: &mut [f64],
        d_u: &mut [f64],
    ) {
        let w = self.omega;
        let s = pt.s();
        let t = pt.t();
        let c1 = radius - pt.r1;
        let c2 = radius - pt.r2;
        let e = (-alpha * s).exp();
        let cut = c1 * c2;

        let mut sp = [0.0; 32];
        let mut tp = [0.0; 64];
        let mut upw = [0.0; 32];
        debug_assert!(2 * w + 1 < 64);
        sp[0] = 1.0;
        tp[0] = 1.0;
        upw[0] = 1.0;
        for k in 1..=w {
            sp[k] = sp[k - 1] * s;
            upw[k] = upw[k - 1] * pt.u;
        }
        for k in 1..=2 * w {
            tp[k] = tp[k - 1] * t;
        }

        for (i, idx) in self.indices.iter().enumerate() {
            let (n, m2, p) = (idx.n, 2 * idx.m, idx.p);
            let sn = sp[n];
            let tm = tp[m2];
            let up = upw[p];
            let poly = sn * tm * up;
            let dp_ds = if n > 0 {
                n as f64 * sp[n - 1] * tm * up
            } else {
                0.0
            };
            let dp_dt = if m2 > 0 {
                m2 as f64 * sn * tp[m2 - 1] * up
            } else {
                0.0
            };
            let dp_du = if p > 0 {
                p as f64 * sn * tm * upw[p - 1]
            } else {
                0.0
            };
            value[i] = cut * e * poly;
            d_r1[i] = e * (-c2 * poly + cut * (-alpha * poly + dp_ds + dp_dt));
            d_r2[i] = e * (-c1 * poly + cut * (-alpha * poly + dp_ds - dp_dt));
            d_u[i] = cut * e * dp_du;
        }
    }
}
