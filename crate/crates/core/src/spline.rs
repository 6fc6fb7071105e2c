//! Natural cubic spline interpolation and bracketed root finding.

use crate::error::{Error, Result};

/// Interpolating cubic spline with zero second derivative at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalCubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 3 || y.len() != n {
            return Err(Error::Analysis(format!(
                "spline needs >= 3 matching knots, got {} and {}",
                n,
                y.len()
            )));
        }
        if x.windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::Analysis(
                "spline knots must be strictly increasing".into(),
            ));
        }
        // Thomas algorithm on the interior second derivatives.
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
        }
        for i in 1..k {
            let f = h[i] / diag[i - 1];
            diag[i] -= f * h[i];
            rhs[i] -= f * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        for i in (0..k).rev() {
            let upper = if i + 1 < k { h[i + 1] * m[i + 2] } else { 0.0 };
            m[i + 1] = (rhs[i] - upper) / diag[i];
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, t: f64) -> usize {
        let last = self.x.len() - 2;
        match self.x.partition_point(|&k| k <= t) {
            0 => 0,
            i => (i - 1).min(last),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) * h * self.m[i] / 6.0
            + (3.0 * b * b - 1.0) * h * self.m[i + 1] / 6.0
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let b = (t - self.x[i]) / h;
        (1.0 - b) * self.m[i] + b * self.m[i + 1]
    }

    /// Second derivatives at the knots.
    pub fn knot_curvatures(&self) -> &[f64] {
        &self.m
    }
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}

/// Roots of `f` located by sign changes between consecutive `points`.
///
/// With `falling_only`, only `+ -> -` crossings are returned.
pub fn bracketed_roots(
    points: &[f64],
    tol: f64,
    falling_only: bool,
    f: impl Fn(f64) -> f64,
) -> Vec<f64> {
    let mut roots = Vec::new();
    for w in points.windows(2) {
        let (fa, fb) = (f(w[0]), f(w[1]));
        // a zero exactly on a knot belongs to the window ending there
        let crosses = fa != 0.0 && (fb == 0.0 || fa.signum() != fb.signum());
        if crosses && (!falling_only || fa > 0.0) {
            if let Some(r) = bisect(w[0], w[1], tol, &f) {
                roots.push(r);
            }
        }
    }
    roots
}
