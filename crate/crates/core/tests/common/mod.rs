#![allow(dead_code)]

use confined_helium::basis::{enumerate_basis, eval_basis, BasisIndex, HylleraasPoint};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Five-point central difference of `f` at `x`.
pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Random point with all three coordinates strictly inside the cavity domain.
pub fn interior_point(rng: &mut StdRng, radius: f64) -> HylleraasPoint {
    let r1 = rng.random_range(0.05..0.95) * radius;
    let r2 = rng.random_range(0.05..0.95) * radius;
    let (lo, hi) = ((r1 - r2).abs(), r1 + r2);
    let u = lo + (hi - lo) * rng.random_range(0.05..0.95);
    HylleraasPoint { r1, r2, u }
}

/// Largest finite-difference mismatch of the analytic gradient of `idx`,
/// relative to the gradient norm at each point.
pub fn gradient_error(idx: BasisIndex, alpha: f64, radius: f64, points: &[HylleraasPoint]) -> f64 {
    let mut worst: f64 = 0.0;
    for &pt in points {
        let g = eval_basis(idx, alpha, radius, pt);
        // the step must resolve the smallest local length, including |r1 - r2|
        let scale = [
            pt.r1,
            pt.r2,
            pt.u,
            (pt.r1 - pt.r2).abs(),
            radius - pt.r1,
            radius - pt.r2,
        ]
        .into_iter()
        .fold(radius, f64::min);
        let h = 1e-3 * scale.max(1e-4 * radius);
        let v = |p: HylleraasPoint| eval_basis(idx, alpha, radius, p).value;
        let fd = [
            central_difference(|x| v(HylleraasPoint { r1: x, ..pt }), pt.r1, h),
            central_difference(|x| v(HylleraasPoint { r2: x, ..pt }), pt.r2, h),
            central_difference(|x| v(HylleraasPoint { u: x, ..pt }), pt.u, h),
        ];
        let an = [g.d_r1, g.d_r2, g.d_u];
        let norm = an.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        for (a, f) in an.iter().zip(fd) {
            worst = worst.max((a - f).abs() / norm);
        }
    }
    worst
}

/// Worst gradient error over every basis function of order `omega`.
pub fn basis_gradient_error(omega: usize, alpha: f64, radius: f64, count: usize, seed: u64) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let points: Vec<HylleraasPoint> = (0..count)
        .map(|_| interior_point(&mut rng, radius))
        .collect();
    enumerate_basis(omega)
        .into_iter()
        .map(|idx| gradient_error(idx, alpha, radius, &points))
        .fold(0.0, f64::max)
}
