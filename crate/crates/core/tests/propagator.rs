use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dmsoliton::field::*;
use dmsoliton::propagator::*;

fn packets(grid: Grid, seed: u64) -> WaveField {
    random_packets(grid, &mut ChaCha8Rng::seed_from_u64(seed), 3, 4.0, 2.0)
}

#[test]
fn continuous_examples() {
    let grid = Grid::new(256, 40.0).unwrap();
    let f = packets(grid, 1);
    assert_eq!(free_evolve_cont(&f, 0.0), f);
    let g = ChirpedGaussian::normalized(Complex64::new(1.0, 0.0))
        .unwrap()
        .sample(grid);
    let t1 = free_evolve_cont(&g, 1.0);
    let centre = t1.samples()[grid.len() / 2].norm();
    let expected = (2.0 / std::f64::consts::PI).powf(0.25) * 17f64.powf(-0.25);
    assert_relative_eq!(centre, expected, epsilon = 1e-6);
    assert_relative_eq!(free_evolve_cont(&f, 0.37).norm(), f.norm(), epsilon = 1e-12);
}

#[test]
fn sampled_evolution_matches_chirped_closed_form() {
    let grid = Grid::new(512, 60.0).unwrap();
    let g = ChirpedGaussian::normalized(Complex64::new(1.0, 0.5)).unwrap();
    let numeric = free_evolve_cont(&g.sample(grid), 0.8);
    let exact = g.evolved(0.8).sample(grid);
    assert!(numeric.axpy(Complex64::new(-1.0, 0.0), &exact).norm() < 1e-10);
}

#[test]
fn discrete_examples() {
    let lattice = Lattice::new(32).unwrap();
    let d = LatticeField::delta(lattice, 0).unwrap();
    assert_eq!(free_evolve_disc(&d, 0.0).field, d);
    let half = free_evolve_disc(&d, 0.5);
    assert!(!half.truncation_warning);
    assert_relative_eq!(half.field.at(1).norm(), 0.440_050_585_744_933_5, epsilon = 1e-8);
    assert_relative_eq!(free_evolve_disc(&d, 2.0).field.norm(), 1.0, epsilon = 1e-12);
}

#[test]
fn truncation_guard_flags_wrapping() {
    let lattice = Lattice::new(8).unwrap();
    let d = LatticeField::delta(lattice, 0).unwrap();
    assert!(free_evolve_disc(&d, 6.0).truncation_warning);
}

#[test]
fn oracle_examples() {
    assert_eq!(disc_kernel_oracle(0, 0.0).unwrap(), Complex64::new(1.0, 0.0));
    assert_relative_eq!(
        disc_kernel_oracle(1, 0.5).unwrap().norm(),
        0.440_050_585_744_933_5,
        epsilon = 1e-12
    );
    let k2 = disc_kernel_oracle(2, 0.5).unwrap().norm();
    assert_relative_eq!(k2, 0.114_903_484_931_900_5, epsilon = 1e-12);
    let bound = (2f64).exp() * 4.0 / 2.0;
    assert!(k2 <= bound.min(1.0));
    assert!(disc_kernel_oracle(201, 0.5).is_err());
    assert_eq!(
        disc_kernel_oracle(-3, 0.7).unwrap().norm(),
        disc_kernel_oracle(3, 0.7).unwrap().norm()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn continuous_group_law(seed in any::<u64>(), r in -1.0..1.0f64, s in -1.0..1.0f64) {
        let grid = Grid::new(128, 30.0).unwrap();
        let f = packets(grid, seed);
        let two = free_evolve_cont(&free_evolve_cont(&f, r), s);
        let one = free_evolve_cont(&f, r + s);
        prop_assert!(two.axpy(Complex64::new(-1.0, 0.0), &one).norm() < 1e-12);
        prop_assert!((one.norm() - f.norm()).abs() < 1e-12);
    }

    #[test]
    fn discrete_group_law(seed in any::<u64>(), r in -1.0..1.0f64, s in -1.0..1.0f64) {
        let lattice = Lattice::new(24).unwrap();
        let f = random_lattice(lattice, &mut ChaCha8Rng::seed_from_u64(seed), 5);
        let two = free_evolve_disc(&free_evolve_disc(&f, r).field, s).field;
        let one = free_evolve_disc(&f, r + s).field;
        prop_assert!(two.axpy(Complex64::new(-1.0, 0.0), &one).norm() < 1e-12);
        prop_assert!((one.norm() - f.norm()).abs() < 1e-12);
    }

    #[test]
    fn spectral_lattice_evolution_matches_oracle(r in -2.0..2.0f64, x in -20i64..=20) {
        let lattice = Lattice::new(64).unwrap();
        let d = LatticeField::delta(lattice, 0).unwrap();
        let v = free_evolve_disc(&d, r).field.at(x);
        prop_assert!((v - disc_kernel_oracle(x, r).unwrap()).norm() < 1e-8);
    }
}
