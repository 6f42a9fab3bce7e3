use dmsoliton::dispersion::QuadMeasure;
use dmsoliton::field::*;
use dmsoliton::io::format_check;
use dmsoliton::verify::*;
use dmsoliton::Error;

#[test]
fn suite_selection() {
    let r = run_suite(&["kernel".to_string()]).unwrap();
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].name, "kernel");
    assert!(matches!(
        run_suite(&["kernel".to_string(), "nonexistent".to_string()]),
        Err(Error::UnknownCheck(name)) if name == "nonexistent"
    ));
}

#[test]
fn strichartz_single_check() {
    let r = run_suite(&["strichartz".to_string()]).unwrap();
    assert_eq!(r.len(), 1);
    assert!(r[0].pass, "{:?}", r[0]);
    assert_eq!(
        strichartz_integral(&WaveField::zeros(Grid::new(64, 20.0).unwrap())),
        0.0
    );
}

#[test]
fn strichartz_gaussian_is_sharp() {
    let v = strichartz_integral(&unit_gaussian(Grid::new(512, 40.0).unwrap()));
    assert!((v - STRICHARTZ_BOUND).abs() <= 1e-3 * STRICHARTZ_BOUND, "{v}");
}

#[test]
fn checks_are_deterministic() {
    for name in ["galilei", "gradient", "duality"] {
        let a = run_check(name).unwrap();
        let b = run_check(name).unwrap();
        assert_eq!(a.measured, b.measured, "{name}");
        assert!(a.pass, "{a:?}");
    }
    let a = run_check_seeded("boundedness", Some(3)).unwrap();
    let b = run_check_seeded("boundedness", Some(3)).unwrap();
    assert_eq!(a.measured, b.measured);
}

#[test]
fn records_have_six_fields() {
    let r = run_check("kernel").unwrap();
    let line = format_check(&r);
    let cols: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(cols.len(), 6, "{line}");
    assert_eq!(cols[0], "kernel");
    assert_eq!(cols[1], "pass");
    assert_eq!(cols[4].parse::<f64>().unwrap(), 1e-8);
}

#[test]
fn superexp_refuses_non_solutions() {
    let d = LatticeField::delta(Lattice::new(64).unwrap(), 0).unwrap();
    assert!(matches!(
        check_superexp_decay(&d, &QuadMeasure::uniform01()),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn overlapping_or_oversized_separations_are_skipped() {
    let mu = QuadMeasure::uniform01();
    let err = check_bilinear_decay(&[0.0, 4.0, 8.0, 16.0], &mu, Space::Fourier).unwrap_err();
    assert!(err.to_string().contains("skipped"));
    assert!(check_bilinear_decay(&[4.0, 8.0, 16.0, 500.0], &mu, Space::Real).is_err());
    assert!(check_discrete_refined(&[0, 8], &mu).is_err());
    assert!(discrete_refined_value(40, &mu, 64).is_err());
}

#[test]
fn duality_examples() {
    let r = check_duality(0.25, 1.0, 1).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.measured[3], 0.0);
    assert!(check_duality(-0.5, 0.5, 1).is_err());
}

#[test]
fn discrete_refined_examples() {
    let mu = QuadMeasure::uniform01();
    let q8 = discrete_refined_value(4, &mu, 64).unwrap();
    let q16 = discrete_refined_value(8, &mu, 64).unwrap();
    assert!(q16 < q8);
    for (s, q) in [(8.0f64, q8), (16.0, q16)] {
        assert!(q.ln() / (s * s.ln()) <= -0.2);
    }
}

#[test]
fn quasi_locality_refines() {
    let mu = QuadMeasure::uniform01();
    let coarse = quasi_locality_value(1024, 2.0, Space::Real, &mu).unwrap();
    let fine = quasi_locality_value(2048, 2.0, Space::Real, &mu).unwrap();
    assert!(coarse <= 1e-6 && fine < coarse);
}

#[test]
fn slope_fit() {
    let x = [1.0, 2.0, 3.0];
    assert!((fit_slope(&x, &[2.0, 4.0, 6.0]) - 2.0).abs() < 1e-14);
}
