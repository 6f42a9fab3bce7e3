use approx::assert_relative_eq;
use num_complex::Complex64;

use dmsoliton::dispersion::QuadMeasure;
use dmsoliton::field::*;
use dmsoliton::functional::{best_gaussian, gaussian_q_oracle, Functional};
use dmsoliton::solver::*;
use dmsoliton::verify::{delta_q_oracle, unit_gaussian, BOUND_12_QUARTER, GAUSSIAN_Q_UNIFORM01};
use dmsoliton::Error;

/// `P` of the `lambda = 1` continuous maximizer, uniform01, `N = 512`, `L = 40`.
const P1_CONTINUOUS: f64 = 0.421_793_648_938;
/// `P` of the `lambda = 1` lattice maximizer, uniform01, `M = 64`.
const P1_DISCRETE: f64 = 0.759_329_925_349;
/// `Q` of the `d_av = 1e-3` energy minimizer on the same grid.
const P_DAV_1E3: f64 = 0.421_744_965_5;
/// `Q(delta_0)` for uniform01 from the Bessel series.
const Q_DELTA: f64 = 0.524_606_526_531_277;

fn grid() -> Grid {
    Grid::new(512, 40.0).unwrap()
}

#[test]
fn continuous_maximizer() {
    let mu = QuadMeasure::uniform01();
    let (f, r) = maximize_continuous(1.0, &mu, grid(), &SolverOptions::default()).unwrap();
    assert!(r.converged);
    assert!(r.residual <= 1e-8);
    assert!(r.p_value >= GAUSSIAN_Q_UNIFORM01 && r.p_value <= BOUND_12_QUARTER);
    let (sigma, real_best) = best_gaussian(&mu, false);
    assert_eq!(sigma.im, 0.0);
    assert!(r.p_value >= real_best);
    assert!(r.p_value >= gaussian_q_oracle(sigma, &mu).unwrap());
    assert_relative_eq!(r.p_value, P1_CONTINUOUS, max_relative = 1e-9);
    assert_relative_eq!(f.norm_sqr(), 1.0, epsilon = 1e-12);
    assert_relative_eq!(r.omega, r.p_value, epsilon = 1e-12);
    assert!(r.tails.is_monotone());
    let (xc, kc) = r.centroid_drift.last().copied().unwrap();
    assert!(xc.abs() < 1e-6 && kc.abs() < 1e-6);
}

#[test]
fn projected_ascent_reaches_the_same_value() {
    let mu = QuadMeasure::uniform01();
    let opts = SolverOptions {
        method: Method::ProjectedAscent,
        tol: 1e-7,
        ..SolverOptions::default()
    };
    let (_, r) = maximize_continuous(1.0, &mu, grid(), &opts).unwrap();
    assert!(r.converged, "{r:?}");
    assert_relative_eq!(r.p_value, P1_CONTINUOUS, max_relative = 1e-8);
}

#[test]
fn seeded_start_reaches_the_same_value() {
    let mu = QuadMeasure::uniform01();
    let opts = SolverOptions {
        seed: Some(5),
        ..SolverOptions::default()
    };
    let (_, r) = maximize_continuous(1.0, &mu, grid(), &opts).unwrap();
    assert!(r.converged);
    assert_relative_eq!(r.p_value, P1_CONTINUOUS, max_relative = 1e-8);
}

#[test]
fn scaling_law() {
    let mu = QuadMeasure::uniform01();
    let opts = SolverOptions::default();
    let (_, r1) = maximize_continuous(1.0, &mu, grid(), &opts).unwrap();
    let start = unit_gaussian(grid()).scaled(Complex64::new(2f64.sqrt(), 0.0));
    let (_, r2) = maximize_from(start, 2.0, &mu, &opts).unwrap();
    assert_relative_eq!(r2.p_value, 4.0 * r1.p_value, max_relative = 1e-6);
}

#[test]
fn discrete_maximizer() {
    let mu = QuadMeasure::uniform01();
    assert_relative_eq!(delta_q_oracle(&mu), Q_DELTA, max_relative = 1e-12);
    let (f, r) = maximize_discrete(1.0, &mu, Lattice::new(64).unwrap(), &SolverOptions::default()).unwrap();
    assert!(r.converged);
    assert!(r.p_value >= Q_DELTA && r.p_value <= 1.0);
    assert_relative_eq!(r.p_value, P1_DISCRETE, max_relative = 1e-9);
    assert!(f.edge_mass() < 1e-20);
}

#[test]
fn non_convergence_is_reported() {
    let mu = QuadMeasure::uniform01();
    let opts = SolverOptions {
        max_iter: 1,
        ..SolverOptions::default()
    };
    let (_, r) = maximize_continuous(1.0, &mu, grid(), &opts).unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 1);
    assert!(matches!(
        maximize_continuous(0.0, &mu, grid(), &SolverOptions::default()),
        Err(Error::OutOfRange { name: "lambda", .. })
    ));
}

#[test]
fn energy_minimizer_continuation() {
    let mu = QuadMeasure::uniform01();
    let opts = SolverOptions::default();
    let (f0, r0) = maximize_continuous(1.0, &mu, grid(), &opts).unwrap();
    let (f, r) = minimize_energy(f0, 1.0, 1e-3, &mu, &opts).unwrap();
    assert!(r.converged);
    assert!(r.residual <= opts.tol);
    assert!((r.p_value - r0.p_value).abs() <= 0.05 * r0.p_value);
    assert_relative_eq!(r.p_value, P_DAV_1E3, max_relative = 1e-8);
    let h = r.energy.unwrap();
    assert!(h < 0.0);
    let fun = Functional::for_field(&f, &mu);
    assert_relative_eq!(fun.energy(&f, 1e-3).unwrap(), h, epsilon = 1e-12);
}

#[test]
fn energy_minimizer_from_gaussian() {
    let mu = QuadMeasure::uniform01();
    let (_, r) = minimize_energy(unit_gaussian(grid()), 1.0, 1e-3, &mu, &SolverOptions::default()).unwrap();
    assert!(r.converged);
    assert_relative_eq!(r.p_value, P_DAV_1E3, max_relative = 1e-7);
}

#[test]
fn small_discrete_mass_raises_threshold_flag() {
    let mu = QuadMeasure::uniform01();
    let lattice = Lattice::new(32).unwrap();
    let f0 = initial_discrete(lattice, 0.01, None).unwrap();
    let (_, r) = minimize_energy(f0, 0.01, 1.0, &mu, &SolverOptions::default()).unwrap();
    assert!(r.threshold_suspected);
    assert!(!r.converged);
    assert!(minimize_energy(
        initial_discrete(lattice, 1.0, None).unwrap(),
        1.0,
        0.0,
        &mu,
        &SolverOptions::default()
    )
    .is_err());
}

#[test]
fn tail_examples() {
    let g = unit_gaussian(grid());
    let t = tail_diagnostics(&g, &[0.3, 0.1, 0.01]).unwrap();
    assert!(t.is_monotone());
    let widths: Vec<f64> = t.levels.iter().map(|l| l.width).collect();
    assert!(widths[0] < widths[1] && widths[1] < widths[2]);
    assert!(matches!(tail_diagnostics(&g, &[1.5]), Err(Error::OutOfRange { .. })));
}

#[test]
fn maximizer_tails_are_stable_under_refinement() {
    let mu = QuadMeasure::uniform01();
    let opts = SolverOptions::default();
    let mut r01 = Vec::new();
    for n in [512, 1024] {
        let g = Grid::new(n, 40.0).unwrap();
        let (f, _) = maximize_continuous(1.0, &mu, g, &opts).unwrap();
        let t = tail_diagnostics(&f, &[0.1]).unwrap();
        assert!(t.levels[0].width.is_finite());
        r01.push(t.levels[0].width);
    }
    assert!((r01[0] - r01[1]).abs() <= 2.0 * grid().dx());
}
