use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dmsoliton::dispersion::QuadMeasure;
use dmsoliton::field::*;
use dmsoliton::functional::{self, Functional};
use dmsoliton::verify::{unit_gaussian, GAUSSIAN_Q_UNIFORM01};
use dmsoliton::Error;

/// `gt_residual` of the unit Gaussian at `omega = 0.295454`, `d_av = 0`,
/// uniform01, `N = 512`, `L = 40`.
const GAUSSIAN_RESIDUAL: f64 = 2.608_616_988_151_287e-1;

fn grid() -> Grid {
    Grid::new(512, 40.0).unwrap()
}

fn packets(grid: Grid, seed: u64) -> WaveField {
    random_packets(grid, &mut ChaCha8Rng::seed_from_u64(seed), 3, 4.0, 2.0)
}

#[test]
fn zero_fields() {
    let mu = QuadMeasure::uniform01();
    let z = WaveField::zeros(grid());
    assert_eq!(functional::q4(&z, &z, &z, &z, &mu).unwrap(), Complex64::new(0.0, 0.0));
    assert!(functional::q3(&z, &z, &z, &mu).unwrap().is_zero());
    assert!(functional::gradient(&z, &mu).unwrap().is_zero());
    assert_eq!(functional::energy(&z, 1.0, &mu).unwrap(), 0.0);
    assert!(matches!(
        functional::gt_residual(&z, 1.0, 0.0, &mu),
        Err(Error::ZeroField)
    ));
}

#[test]
fn four_linearity_is_exact() {
    let mu = QuadMeasure::uniform01();
    let f = packets(grid(), 4);
    let two = f.scaled(Complex64::new(2.0, 0.0));
    let a = functional::q4(&f, &f, &f, &f, &mu).unwrap();
    let b = functional::q4(&two, &two, &two, &two, &mu).unwrap();
    assert_eq!(b, 16.0 * a);
    assert!(a.im.abs() <= 1e-15 * a.re && a.re > 0.0);
}

#[test]
fn gaussian_pairing_value() {
    let mu = QuadMeasure::uniform01();
    let g = unit_gaussian(grid());
    let q = functional::q3(&g, &g, &g, &mu).unwrap();
    assert_relative_eq!(g.inner(&q).re, GAUSSIAN_Q_UNIFORM01, max_relative = 1e-4);
}

#[test]
fn gradient_is_four_q3_and_cubic() {
    let mu = QuadMeasure::uniform01();
    let f = packets(grid(), 8);
    let g = functional::gradient(&f, &mu).unwrap();
    let q = functional::q3(&f, &f, &f, &mu).unwrap();
    assert!(g.axpy(Complex64::new(-4.0, 0.0), &q).norm() <= 1e-14 * g.norm());
    let c = 1.7;
    let gc = functional::gradient(&f.scaled(Complex64::new(c, 0.0)), &mu).unwrap();
    assert!(gc.axpy(Complex64::new(-c * c * c, 0.0), &g).norm() <= 1e-13 * gc.norm());
}

#[test]
fn energy_examples() {
    let mu = QuadMeasure::uniform01();
    let g = unit_gaussian(grid());
    assert_relative_eq!(functional::energy(&g, 0.0, &mu).unwrap(), -0.073_863_4, epsilon = 1e-6);
    assert_relative_eq!(functional::energy(&g, 1.0, &mu).unwrap(), 0.426_136_6, epsilon = 1e-6);
    let fun = Functional::for_field(&g, &mu);
    assert_relative_eq!(fun.stiffness(&g).unwrap(), 1.0, epsilon = 1e-10);
}

#[test]
fn gaussian_residual_baseline() {
    let mu = QuadMeasure::uniform01();
    let g = unit_gaussian(grid());
    let r = functional::gt_residual(&g, 0.295454, 0.0, &mu).unwrap();
    assert!(r > 0.0);
    assert_relative_eq!(r, GAUSSIAN_RESIDUAL, max_relative = 1e-9);
    assert!(functional::gt_residual(&g, 0.0, 0.0, &mu).is_err());
    assert!(functional::gt_residual(&g, -1.0, 0.0, &mu).is_err());
}

#[test]
fn residual_is_scale_invariant() {
    let mu = QuadMeasure::uniform01();
    let f = packets(grid(), 12);
    let c = 1.9;
    let fc = f.scaled(Complex64::new(c, 0.0));
    let a = functional::gt_residual(&f, 0.3, 0.0, &mu).unwrap();
    let b = functional::gt_residual(&fc, 0.3 * c * c, 0.0, &mu).unwrap();
    assert_relative_eq!(a, b, max_relative = 1e-10);
    // With dispersion the average part scales like omega.
    let a = functional::gt_residual(&f, 0.3, 0.2, &mu).unwrap();
    let b = functional::gt_residual(&fc, 0.3 * c * c, 0.2 * c * c, &mu).unwrap();
    assert_relative_eq!(a, b, max_relative = 1e-10);
}

#[test]
fn mismatched_domains_are_rejected() {
    let mu = QuadMeasure::uniform01();
    let a = WaveField::zeros(grid());
    let b = WaveField::zeros(Grid::new(256, 40.0).unwrap());
    assert!(matches!(
        functional::q4(&a, &b, &a, &a, &mu),
        Err(Error::DomainMismatch)
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pairing_identity_on_grid(seed in any::<u64>()) {
        let mu = QuadMeasure::uniform01();
        let grid = Grid::new(256, 30.0).unwrap();
        let f = packets(grid, seed);
        let g = packets(grid, seed.wrapping_add(1));
        let lhs = g.inner(&functional::q3(&f, &f, &f, &mu).unwrap());
        let rhs = functional::q4(&g, &f, &f, &f, &mu).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * g.norm() * f.norm().powi(3));
    }

    #[test]
    fn pairing_identity_on_lattice(seed in any::<u64>()) {
        let mu = QuadMeasure::uniform01();
        let lattice = Lattice::new(24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_lattice(lattice, &mut rng, 6);
        let g = random_lattice(lattice, &mut rng, 6);
        let lhs = g.inner(&functional::q3(&f, &f, &f, &mu).unwrap());
        let rhs = functional::q4(&g, &f, &f, &f, &mu).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn homogeneity(seed in any::<u64>(), c in 0.1..3.0f64) {
        let mu = QuadMeasure::uniform01();
        let f = packets(Grid::new(256, 30.0).unwrap(), seed);
        let a = functional::q4(&f, &f, &f, &f, &mu).unwrap().re;
        let fc = f.scaled(Complex64::new(c, 0.0));
        let b = functional::q4(&fc, &fc, &fc, &fc, &mu).unwrap().re;
        prop_assert!((b - c.powi(4) * a).abs() <= 1e-12 * b.abs());
    }
}
