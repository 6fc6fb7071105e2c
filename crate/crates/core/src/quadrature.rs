//! Gauss–Legendre rules for the confined two-electron S-state domain and
//! for Legendre projections over the inter-electron angle.

use crate::basis::HylleraasPoint;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights affinely mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint limit P_n'(+-1) = (+-1)^(n-1) n(n+1)/2
        x.signum().powi(n as i32 - 1) * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

pub fn legendre(l: usize, x: f64) -> f64 {
    legendre_with_derivative(l, x).0
}

/// Fills `out[l] = P_l(x)` for `l = 0..out.len()`.
pub fn legendre_table(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for l in 2..out.len() {
        let lf = l as f64;
        out[l] = ((2.0 * lf - 1.0) * x * out[l - 1] - (lf - 1.0) * out[l - 2]) / lf;
    }
}

/// Quadrature over `t = cos(theta)` in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AngleRule {
    /// Plain Gauss–Legendre rule in `t`.
    pub fn gauss(k: usize) -> Self {
        let g = GaussLegendre::new(k);
        Self {
            nodes: g.nodes,
            weights: g.weights,
        }
    }

    /// Angle rule adapted to a fixed radial pair `(r1, r2)`.
    ///
    /// Gauss–Legendre nodes are placed in the inter-electron distance
    /// `u in (|r1 - r2|, r1 + r2)` and carried to `t` through
    /// `t = (r1^2 + r2^2 - u^2) / (2 r1 r2)`, `dt = -u du / (r1 r2)`.
    /// Integrands that are polynomial in `u` (the Hylleraas wavefunction
    /// times `P_l(t)`) are then integrated exactly, whereas a rule in `t`
    /// converges slowly because of the `sqrt` branch point of odd powers
    /// of `u` at `t = 1` when `r1 = r2`. Both radii must be positive.
    pub fn for_pair(base: &GaussLegendre, r1: f64, r2: f64) -> Self {
        let lo = (r1 - r2).abs();
        let hi = r1 + r2;
        let inv = 1.0 / (r1 * r2);
        let mut nodes = Vec::with_capacity(base.len());
        let mut weights = Vec::with_capacity(base.len());
        for (u, w) in base.mapped(lo, hi) {
            let t = ((r1 * r1 + r2 * r2 - u * u) * 0.5 * inv).clamp(-1.0, 1.0);
            nodes.push(t);
            weights.push(w * u * inv);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `(2l+1)/2 * sum_k w_k P_l(t_k) values_k`, the Legendre projection of a
/// function sampled at the nodes of `rule`.
pub fn legendre_project(values: &[f64], l: usize, rule: &AngleRule) -> f64 {
    assert_eq!(values.len(), rule.len());
    let sum: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .zip(values)
        .map(|((&t, &w), &v)| w * legendre(l, t) * v)
        .sum();
    0.5 * (2 * l + 1) as f64 * sum
}

/// Per-dimension Gauss point counts of a [`QuadratureRule3D`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureOrders {
    pub r1: usize,
    pub r2: usize,
    pub u: usize,
}

impl QuadratureOrders {
    pub const fn new(r1: usize, r2: usize, u: usize) -> Self {
        Self { r1, r2, u }
    }

    /// Default orders for a basis of order `omega`.
    ///
    /// The radial directions use `24 + 4 omega` points. Every matrix-element
    /// integrand is a polynomial of degree at most `2 omega + 1` in `u`, so
    /// `omega + 2` points in `u` are already exact.
    pub const fn for_omega(omega: usize) -> Self {
        Self {
            r1: 24 + 4 * omega,
            r2: 24 + 4 * omega,
            u: omega + 2,
        }
    }

    pub const fn doubled(&self) -> Self {
        Self {
            r1: 2 * self.r1,
            r2: 2 * self.r2,
            u: 2 * self.u,
        }
    }
}

/// Tensor-product rule over `0 < r1, r2 < R`, `|r1 - r2| < u < r1 + r2`.
///
/// The radial square is split along the diagonal `r1 = r2` and each half is
/// mapped onto the unit square (`r_< = x r_>`), so the inner limits follow
/// the triangle boundary and integrands with `|r1 - r2|` kinks are handled
/// exactly. Weights carry the S-state volume element `8 pi^2 r1 r2 u`.
#[derive(Debug, Clone)]
pub struct QuadratureRule3D {
    pub radius: f64,
    pub orders: QuadratureOrders,
    pub nodes: Vec<HylleraasPoint>,
    pub weights: Vec<f64>,
    symmetric_half: bool,
}

impl QuadratureRule3D {
    /// Whether the rule only covers `r2 < r1` (with doubled weights).
    pub fn is_symmetric_half(&self) -> bool {
        self.symmetric_half
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(HylleraasPoint) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

fn check_rule_args(radius: f64, orders: QuadratureOrders) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidRadius(radius));
    }
    if orders.r1 < 2 || orders.r2 < 2 || orders.u < 2 {
        return Err(Error::InvalidArgument(format!(
            "quadrature orders must be >= 2, got ({}, {}, {})",
            orders.r1, orders.r2, orders.u
        )));
    }
    Ok(())
}

// Nodes of the half domain r2 < r1, with an optional mirrored copy.
fn build_rule(radius: f64, orders: QuadratureOrders, mirror: bool) -> QuadratureRule3D {
    let g_outer = GaussLegendre::new(orders.r1);
    let g_inner = GaussLegendre::new(orders.r2);
    let g_u = GaussLegendre::new(orders.u);
    let factor = if mirror { 1.0 } else { 2.0 };
    let cap = orders.r1 * orders.r2 * orders.u * if mirror { 2 } else { 1 };
    let mut nodes = Vec::with_capacity(cap);
    let mut weights = Vec::with_capacity(cap);
    for (big, w_big) in g_outer.mapped(0.0, radius) {
        for (x, w_x) in g_inner.mapped(0.0, 1.0) {
            let small = x * big;
            let w_pair = w_big * w_x * big;
            for (u, w_u) in g_u.mapped(big - small, big + small) {
                let w = factor * 8.0 * PI * PI * big * small * u * w_pair * w_u;
                nodes.push(HylleraasPoint::new(big, small, u));
                weights.push(w);
                if mirror {
                    nodes.push(HylleraasPoint::new(small, big, u));
                    weights.push(w);
                }
            }
        }
    }
    QuadratureRule3D {
        radius,
        orders,
        nodes,
        weights,
        symmetric_half: !mirror,
    }
}

/// Rule over the full confined domain.
pub fn build_rule_3d(radius: f64, orders: QuadratureOrders) -> Result<QuadratureRule3D> {
    check_rule_args(radius, orders)?;
    Ok(build_rule(radius, orders, true))
}

/// Rule over the half domain `r2 < r1` with doubled weights.
///
/// Exact replacement for [`build_rule_3d`] on integrands symmetric under
/// `r1 <-> r2`, at half the cost. All matrix elements of the singlet
/// Hylleraas basis are of that kind.
pub fn build_rule_3d_symmetric(radius: f64, orders: QuadratureOrders) -> Result<QuadratureRule3D> {
    check_rule_args(radius, orders)?;
    Ok(build_rule(radius, orders, false))
}
