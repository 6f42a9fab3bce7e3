use approx::assert_relative_eq;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dmsoliton::dispersion::{DispersionProfile, QuadMeasure, Segment};
use dmsoliton::dynamics::*;
use dmsoliton::field::*;
use dmsoliton::solver::{maximize_continuous, SolverOptions};
use dmsoliton::verify::{fit_slope, unit_gaussian, BREATHER_BASELINE};
use dmsoliton::Error;

fn grid() -> Grid {
    Grid::new(512, 40.0).unwrap()
}

fn standard(eps: f64) -> DispersionProfile {
    DispersionProfile::standard(0.0, eps).unwrap()
}

#[test]
fn zero_data_stays_zero() {
    let z = WaveField::zeros(grid());
    let t = split_step(&z, &standard(0.1), 0.2, 0.01, 4).unwrap();
    assert!(t.fields.iter().all(|f| f.is_zero()));
    let t = averaged_evolve(&z, 0.0, &QuadMeasure::uniform01(), 0.1, 0.01, 2).unwrap();
    assert!(t.fields.iter().all(|f| f.is_zero()));
    assert_eq!(t.times.first(), Some(&0.0));
    assert_relative_eq!(*t.times.last().unwrap(), 0.1, epsilon = 1e-12);
}

#[test]
fn pure_cubic_phase_rotation() {
    let flat = DispersionProfile::new(
        vec![Segment {
            start: -1.0,
            end: 1.0,
            value: 0.0,
        }],
        0.0,
        0.1,
    )
    .unwrap();
    let c = Complex64::new(0.6, -0.3);
    let u0 = LatticeField::from_fn(Lattice::new(8).unwrap(), |_| c);
    let t = split_step(&u0, &flat, 1.0, 0.01, 1).unwrap();
    let exact = c * Complex64::new(0.0, c.norm_sqr()).exp();
    for z in t.last().unwrap().samples() {
        assert!((z - exact).norm() < 1e-8);
    }
}

#[test]
fn split_step_conserves_norm() {
    let f = random_packets(grid(), &mut ChaCha8Rng::seed_from_u64(2), 3, 4.0, 2.0);
    let t = split_step(&f, &standard(0.1), 10.0, 0.01, 10).unwrap();
    assert_eq!(t.times.len(), 11);
    assert!(t.norm_drift <= 1e-10, "{}", t.norm_drift);
    let l = random_lattice(Lattice::new(32).unwrap(), &mut ChaCha8Rng::seed_from_u64(2), 5);
    assert!(split_step(&l, &standard(0.1), 10.0, 0.01, 0).unwrap().norm_drift <= 1e-10);
}

#[test]
fn strang_splitting_is_second_order() {
    let f = random_packets(grid(), &mut ChaCha8Rng::seed_from_u64(6), 2, 3.0, 1.0).scaled(Complex64::new(1.5, 0.0));
    let profile = standard(0.1);
    let t_end = 0.4;
    let run = |dt: f64| split_step(&f, &profile, t_end, dt, 0).unwrap().last().unwrap().clone();
    let reference = run(0.000_312_5);
    let dts = [0.01, 0.005, 0.0025];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| run(dt).axpy(Complex64::new(-1.0, 0.0), &reference).norm())
        .collect();
    let slope = fit_slope(&dts.map(f64::ln), &errs.iter().map(|e| e.ln()).collect::<Vec<_>>());
    assert!(slope >= 1.8, "order {slope}, errors {errs:?}");
}

#[test]
fn step_alignment_is_enforced() {
    let f = unit_gaussian(grid());
    let p = standard(0.1);
    assert!(matches!(split_step(&f, &p, 1.0, 0.003, 0), Err(Error::Misaligned(_))));
    assert!(matches!(split_step(&f, &p, 1.0, 0.02, 0), Err(Error::Misaligned(_))));
    assert!(matches!(split_step(&f, &p, 0.3, 0.003, 0), Err(Error::Misaligned(_))));
    assert!(split_step(&f, &p, 0.3, 0.005, 0).is_ok());
}

#[test]
fn averaged_flow_conserves_norm_on_gaussian() {
    let t = averaged_evolve(&unit_gaussian(grid()), 0.0, &QuadMeasure::uniform01(), 1.0, 0.01, 5).unwrap();
    assert!(t.norm_drift <= 1e-6, "{}", t.norm_drift);
}

#[test]
fn averaged_flow_aborts_on_norm_drift() {
    let g = unit_gaussian(grid()).scaled(Complex64::new(6.0, 0.0));
    let err = averaged_evolve(&g, 1.0, &QuadMeasure::uniform01(), 4.0, 0.5, 0).unwrap_err();
    assert!(matches!(err, Error::NormDrift { .. }), "{err}");
}

#[test]
fn conjugator_has_period_two_eps() {
    let f = unit_gaussian(grid());
    let p = standard(0.1);
    for t in [0.013, 0.07, 0.151] {
        let a = conjugator(&f, &p, t);
        let b = conjugator(&f, &p, t + 0.2);
        assert!(a.axpy(Complex64::new(-1.0, 0.0), &b).norm() < 1e-12);
    }
}

#[test]
fn dispersion_phase_includes_average() {
    let p = DispersionProfile::standard(0.5, 0.1).unwrap();
    assert_relative_eq!(dispersion_phase(&p, 0.0, 0.2), 0.1, epsilon = 1e-12);
    assert_relative_eq!(dispersion_phase(&p, 0.0, 0.1), -1.0 + 0.05, epsilon = 1e-12);
}

#[test]
fn breather_follows_the_maximizer() {
    let mu = QuadMeasure::uniform01();
    let (f, r) = maximize_continuous(1.0, &mu, grid(), &SolverOptions::default()).unwrap();
    let e1 = breather_error(&f, r.omega, &standard(0.1), 1.0, 0.002).unwrap();
    let e2 = breather_error(&f, r.omega, &standard(0.05), 1.0, 0.001).unwrap();
    assert_relative_eq!(e1, BREATHER_BASELINE, max_relative = 1e-6);
    assert!(e2 / e1 <= 0.7);
    let g = breather_error(&unit_gaussian(grid()), r.omega, &standard(0.1), 1.0, 0.002).unwrap();
    assert!(g >= 5.0 * e1);
    assert!(matches!(
        breather_error(&WaveField::zeros(grid()), 1.0, &standard(0.1), 1.0, 0.002),
        Err(Error::ZeroField)
    ));
}
