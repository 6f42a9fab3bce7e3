//! Time evolution of the modulated equation and of its average.

use num_complex::Complex64;

use crate::dispersion::{DispersionProfile, QuadMeasure};
use crate::error::{Error, Result};
use crate::field::{Domain, Field};
use crate::functional::Functional;
use crate::propagator::{GridPropagator, LatticePropagator};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Snapshots of one run.
#[derive(Clone, Debug)]
pub struct Trajectory<F> {
    pub times: Vec<f64>,
    pub fields: Vec<F>,
    /// `max_t | ||u(t)|| / ||u(0)|| - 1 |` over every step, not only the
    /// recorded ones.
    pub norm_drift: f64,
}

impl<F> Trajectory<F> {
    pub fn last(&self) -> Option<&F> {
        self.fields.last()
    }
}

/// Free flow `e^{-irA}` on whichever domain the field lives on.
#[derive(Clone, Debug)]
pub(crate) enum FreeFlow {
    Grid(GridPropagator),
    Lattice(LatticePropagator),
}

impl FreeFlow {
    pub fn new(domain: Domain) -> Self {
        match domain {
            Domain::Grid(g) => FreeFlow::Grid(GridPropagator::new(g)),
            Domain::Lattice(l) => FreeFlow::Lattice(LatticePropagator::new(l)),
        }
    }

    pub fn apply<F: Field>(&self, f: &F, r: f64) -> F {
        let out = match self {
            FreeFlow::Grid(p) => p.evolve(f.samples(), r),
            FreeFlow::Lattice(p) => p.evolve(f.samples(), r),
        };
        f.with_samples(out)
    }
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::OutOfRange {
            name: "dt",
            value: dt,
            expected: "> 0",
        });
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::OutOfRange {
            name: "t_end",
            value: t_end,
            expected: ">= 0",
        });
    }
    let steps = (t_end / dt).round();
    if (steps * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
        return Err(Error::Misaligned(format!(
            "t_end = {t_end} is not a multiple of dt = {dt}"
        )));
    }
    Ok(steps as usize)
}

/// Every breakpoint `eps * (b + 2m)` of `d(t/eps)` in `[0, t_end]` must be
/// a multiple of `dt`.
fn check_alignment(profile: &DispersionProfile, t_end: f64, dt: f64) -> Result<()> {
    let eps = profile.eps();
    if dt > eps / 10.0 * (1.0 + 1e-12) {
        return Err(Error::Misaligned(format!("dt = {dt} exceeds eps/10 = {}", eps / 10.0)));
    }
    let periods = (t_end / (2.0 * eps)).ceil() as i64 + 1;
    for b in profile.breakpoints() {
        for m in -1..=periods {
            let t = eps * (b + 2.0 * m as f64);
            if t < 0.0 || t > t_end {
                continue;
            }
            let q = t / dt;
            if (q - q.round()).abs() > 1e-7 {
                return Err(Error::Misaligned(format!(
                    "dispersion breakpoint at t = {t} is not a multiple of dt = {dt}"
                )));
            }
        }
    }
    Ok(())
}

fn stride_for(steps: usize, snapshots: usize) -> usize {
    steps.checked_div(snapshots).unwrap_or(steps).max(1)
}

/// Accumulated dispersion `int_{t1}^{t2} d(s) ds` with
/// `d(s) = d0(s/eps)/eps + d_av`.
pub fn dispersion_phase(profile: &DispersionProfile, t1: f64, t2: f64) -> f64 {
    let eps = profile.eps();
    profile.cumulative_periodic(t2 / eps) - profile.cumulative_periodic(t1 / eps) + profile.d_av() * (t2 - t1)
}

/// Strang splitting for `i u_t = d(t) A u - |u|^2 u`. The linear substep is
/// exact (free evolution by the accumulated dispersion), the nonlinear one
/// is the exact phase rotation `u e^{i|u|^2 dt}`. Roughly `snapshots`
/// evenly spaced fields are recorded, plus the initial and final ones.
pub fn split_step<F: Field>(
    u0: &F,
    profile: &DispersionProfile,
    t_end: f64,
    dt: f64,
    snapshots: usize,
) -> Result<Trajectory<F>> {
    let steps = step_count(t_end, dt)?;
    check_alignment(profile, t_end, dt)?;
    let flow = FreeFlow::new(u0.domain());
    let n0 = u0.norm();
    let mut u = u0.clone();
    let stride = stride_for(steps, snapshots);
    let mut traj = Trajectory {
        times: vec![0.0],
        fields: vec![u.clone()],
        norm_drift: 0.0,
    };
    for s in 0..steps {
        let t = s as f64 * dt;
        u = flow.apply(&u, dispersion_phase(profile, t, t + 0.5 * dt));
        for z in u.samples_mut() {
            *z *= (I * z.norm_sqr() * dt).exp();
        }
        u = flow.apply(&u, dispersion_phase(profile, t + 0.5 * dt, t + dt));
        if n0 > 0.0 {
            traj.norm_drift = traj.norm_drift.max((u.norm() / n0 - 1.0).abs());
        }
        if (s + 1) % stride == 0 || s + 1 == steps {
            traj.times.push((s + 1) as f64 * dt);
            traj.fields.push(u.clone());
        }
    }
    Ok(traj)
}

/// Classical RK4 for the averaged equation `i v_t = d_av A v - Q(v,v,v)`.
pub fn averaged_evolve<F: Field>(
    v0: &F,
    d_av: f64,
    measure: &QuadMeasure,
    t_end: f64,
    dt: f64,
    snapshots: usize,
) -> Result<Trajectory<F>> {
    let steps = step_count(t_end, dt)?;
    let fun = Functional::for_field(v0, measure);
    let rhs = |v: &F| -> Result<F> {
        let mut g = fun.q3(v, v, v)?;
        if d_av != 0.0 {
            g = g.axpy(Complex64::new(-d_av, 0.0), &fun.apply_a(v)?);
        }
        // v_t = -i (d_av A v - Q) = i (Q - d_av A v)
        Ok(g.scaled(I))
    };
    let n0 = v0.norm();
    let stride = stride_for(steps, snapshots);
    let mut v = v0.clone();
    let mut traj = Trajectory {
        times: vec![0.0],
        fields: vec![v.clone()],
        norm_drift: 0.0,
    };
    let h = Complex64::new(dt, 0.0);
    for s in 0..steps {
        let k1 = rhs(&v)?;
        let k2 = rhs(&v.axpy(0.5 * h, &k1))?;
        let k3 = rhs(&v.axpy(0.5 * h, &k2))?;
        let k4 = rhs(&v.axpy(h, &k3))?;
        v = v
            .axpy(h / 6.0, &k1)
            .axpy(h / 3.0, &k2)
            .axpy(h / 3.0, &k3)
            .axpy(h / 6.0, &k4);
        if n0 > 0.0 {
            let drift = (v.norm() / n0 - 1.0).abs();
            if drift > 1e-4 {
                return Err(Error::NormDrift { drift, dt });
            }
            traj.norm_drift = traj.norm_drift.max(drift);
        }
        if (s + 1) % stride == 0 || s + 1 == steps {
            traj.times.push((s + 1) as f64 * dt);
            traj.fields.push(v.clone());
        }
    }
    Ok(traj)
}

/// `max_t ||u(t) - e^{i omega t} U_{D(t/eps)} f|| / ||f||` where `u` solves
/// the modulated equation from `u(0) = U_{D(0)} f`, sampled at every step.
pub fn breather_error<F: Field>(f: &F, omega: f64, profile: &DispersionProfile, t_end: f64, dt: f64) -> Result<f64> {
    let steps = step_count(t_end, dt)?;
    check_alignment(profile, t_end, dt)?;
    let norm = f.norm();
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    let flow = FreeFlow::new(f.domain());
    let eps = profile.eps();
    let d = |t: f64| profile.cumulative_periodic(t / eps);
    let mut u = flow.apply(f, d(0.0));
    let mut worst: f64 = 0.0;
    for s in 0..steps {
        let t = s as f64 * dt;
        u = flow.apply(&u, dispersion_phase(profile, t, t + 0.5 * dt));
        for z in u.samples_mut() {
            *z *= (I * z.norm_sqr() * dt).exp();
        }
        u = flow.apply(&u, dispersion_phase(profile, t + 0.5 * dt, t + dt));
        let t1 = t + dt;
        let ansatz = flow.apply(f, d(t1)).scaled((I * omega * t1).exp());
        worst = worst.max(u.axpy(Complex64::new(-1.0, 0.0), &ansatz).norm() / norm);
    }
    Ok(worst)
}

/// `U_{D(t/eps)}` as used by the breather ansatz.
pub fn conjugator<F: Field>(f: &F, profile: &DispersionProfile, t: f64) -> F {
    FreeFlow::new(f.domain()).apply(f, profile.cumulative_periodic(t / profile.eps()))
}
