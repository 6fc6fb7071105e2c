//! The Nystrom grid route and the sine-basis projection route discretize the
//! same kernel independently and must give the same leading eigenvalues.

use confined_helium::schmidt::{schmidt_spectrum, schmidt_spectrum_sine, SineSettings};
use confined_helium::solver::{solve_at_alpha, HamiltonianSpec, SolverSettings};

fn max_leading_difference(radius: f64, omega: usize, alpha: f64) -> f64 {
    let state = solve_at_alpha(
        omega,
        alpha,
        &HamiltonianSpec::helium(radius),
        &SolverSettings::default(),
    )
    .unwrap();
    let grid = schmidt_spectrum(&state, 301, 8, 64).unwrap().largest(10);
    let sine = schmidt_spectrum_sine(&state, 8, &SineSettings::new(100))
        .unwrap()
        .largest(10);
    grid.iter()
        .zip(&sine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[test]
fn routes_agree_at_radius_2_5() {
    let d = max_leading_difference(2.5, 6, 1.3);
    assert!(d < 1e-6, "{d:e}");
}

#[test]
fn routes_agree_at_radius_5() {
    let d = max_leading_difference(5.0, 7, 1.8);
    assert!(d < 1e-6, "{d:e}");
}

#[test]
fn leading_eigenvalue_dominates_and_sum_is_one() {
    let state = solve_at_alpha(
        5,
        2.0,
        &HamiltonianSpec::helium(1.0),
        &SolverSettings::default(),
    )
    .unwrap();
    let spec = schmidt_spectrum(&state, 301, 18, 64).unwrap();
    let top = spec.largest(2);
    assert!(top[0] > 0.99 && top[1] < 0.01, "{top:?}");
    assert!(spec.deficit().abs() < 1e-6, "{}", spec.deficit());
}
