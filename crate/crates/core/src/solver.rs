//! Maximizers of `Q` on the sphere `||f||^2 = lambda`, energy minimizers for
//! positive average dispersion, and tightness diagnostics.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dispersion::QuadMeasure;
use crate::error::{Error, Result};
use crate::field::{
    random_lattice, random_packets, ChirpedGaussian, Domain, Field, Grid, Lattice, LatticeField, WaveField,
};
use crate::functional::Functional;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Method {
    #[default]
    SpectralRenormalization,
    ProjectedAscent,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::SpectralRenormalization => "spectral-renormalization",
            Method::ProjectedAscent => "projected-ascent",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral-renormalization" | "sr" => Ok(Method::SpectralRenormalization),
            "projected-ascent" | "ascent" => Ok(Method::ProjectedAscent),
            other => Err(Error::Precondition(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub method: Method,
    /// Target for the GT residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Spectral renormalization mixing `theta` in `(0, 1]`.
    pub damping: f64,
    /// Initial step of projected ascent and of energy descent.
    pub step: f64,
    pub recenter: bool,
    /// `None` starts from a Gaussian; `Some(seed)` from random bumps.
    pub seed: Option<u64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: Method::SpectralRenormalization,
            tol: 1e-8,
            max_iter: 2000,
            damping: 1.0,
            step: 0.5,
            recenter: true,
            seed: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::OutOfRange {
                name: "tol",
                value: self.tol,
                expected: "> 0",
            });
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::OutOfRange {
                name: "damping",
                value: self.damping,
                expected: "(0, 1]",
            });
        }
        if !(self.step > 0.0) {
            return Err(Error::OutOfRange {
                name: "step",
                value: self.step,
                expected: "> 0",
            });
        }
        if self.max_iter == 0 {
            return Err(Error::OutOfRange {
                name: "max_iter",
                value: 0.0,
                expected: ">= 1",
            });
        }
        Ok(())
    }
}

/// Quantiles of one tail level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailLevel {
    pub eps: f64,
    pub a: f64,
    pub b: f64,
    pub width: f64,
    pub g_value: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TailDiagnostics {
    pub levels: Vec<TailLevel>,
}

impl TailDiagnostics {
    /// Quantiles are nested: lower levels give wider windows.
    pub fn is_monotone(&self) -> bool {
        let mut sorted = self.levels.clone();
        sorted.sort_by(|x, y| x.eps.total_cmp(&y.eps));
        sorted.windows(2).all(|w| w[0].a <= w[1].a && w[0].b >= w[1].b)
    }
}

/// `G_alpha(x) = ((x + alpha^2)^{1/2} - alpha)^{-1/2}`, infinite at 0.
pub fn g_alpha(alpha: f64, x: f64) -> f64 {
    let d = (x + alpha * alpha).sqrt() - alpha;
    if d <= 0.0 {
        f64::INFINITY
    } else {
        d.powf(-0.5)
    }
}

pub const DEFAULT_TAIL_LEVELS: [f64; 3] = [0.01, 0.1, 0.3];

/// Tail quantiles `a_eps`, `b_eps`: the first point carrying at least
/// `eps^2/2` of mass to its left, minus one, and symmetrically on the right.
pub fn tail_diagnostics<F: Field>(field: &F, eps_levels: &[f64]) -> Result<TailDiagnostics> {
    let norm = field.norm();
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    let discrete = matches!(field.domain(), Domain::Lattice(_));
    let x = field.coordinates();
    let cell = field.cell();
    let mass: Vec<f64> = field.samples().iter().map(|z| z.norm_sqr() * cell).collect();
    let mut levels = Vec::with_capacity(eps_levels.len());
    for &eps in eps_levels {
        if !(eps > 0.0 && eps < norm) {
            return Err(Error::OutOfRange {
                name: "eps",
                value: eps,
                expected: "0 < eps < ||f||",
            });
        }
        let target = 0.5 * eps * eps;
        let mut acc = 0.0;
        let mut ja = mass.len() - 1;
        for (j, m) in mass.iter().enumerate() {
            acc += m;
            if acc >= target {
                ja = j;
                break;
            }
        }
        acc = 0.0;
        let mut jb = 0;
        for (j, m) in mass.iter().enumerate().rev() {
            acc += m;
            if acc >= target {
                jb = j;
                break;
            }
        }
        // On the lattice the sums are strict (`x < a`, `x > b`), which moves
        // each quantile one site outwards before the unit margin is applied.
        let (a, b) = if discrete {
            (x[ja], x[jb])
        } else {
            (x[ja] - 1.0, x[jb] + 1.0)
        };
        let width = b - a;
        let g_value = if discrete {
            g_alpha(1.0, (width + 1.0).max(0.0))
        } else {
            g_alpha(0.5, (width - 4.0).max(0.0))
        };
        levels.push(TailLevel {
            eps,
            a,
            b,
            width,
            g_value,
        });
    }
    Ok(TailDiagnostics { levels })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub method: Method,
    pub lambda: f64,
    pub d_av: f64,
    pub omega: f64,
    /// `Q(f,f,f,f)` at the returned field.
    pub p_value: f64,
    /// Energy `H`; only set by [`minimize_energy`].
    pub energy: Option<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub threshold_suspected: bool,
    pub tails: TailDiagnostics,
    /// Centroids of every iterate at which the residual was evaluated.
    pub centroid_drift: Vec<(f64, f64)>,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "lambda",
            value: lambda,
            expected: "> 0",
        })
    }
}

/// Default starting field on a grid: the width-1 Gaussian, or a random
/// packet superposition when a seed is given.
pub fn initial_continuous(grid: Grid, lambda: f64, seed: Option<u64>) -> Result<WaveField> {
    let f = match seed {
        None => ChirpedGaussian::normalized(Complex64::new(1.0, 0.0))?.sample(grid),
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            random_packets(grid, &mut rng, 3, 4.0, 2.0)
        }
    };
    f.normalized(lambda)
}

/// Default starting field on a lattice: `exp(-x^2/9)`, or random values on
/// `|x| <= 5` when a seed is given.
pub fn initial_discrete(lattice: Lattice, lambda: f64, seed: Option<u64>) -> Result<LatticeField> {
    let f = match seed {
        None => LatticeField::from_fn(lattice, |x| Complex64::new((-(x * x) as f64 / 9.0).exp(), 0.0)),
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            random_lattice(lattice, &mut rng, 5)
        }
    };
    f.normalized(lambda)
}

pub fn maximize_continuous(
    lambda: f64,
    measure: &QuadMeasure,
    grid: Grid,
    opts: &SolverOptions,
) -> Result<(WaveField, SolveReport)> {
    check_lambda(lambda)?;
    maximize_from(initial_continuous(grid, lambda, opts.seed)?, lambda, measure, opts)
}

pub fn maximize_discrete(
    lambda: f64,
    measure: &QuadMeasure,
    lattice: Lattice,
    opts: &SolverOptions,
) -> Result<(LatticeField, SolveReport)> {
    check_lambda(lambda)?;
    if measure.support_radius() > 1e6 {
        return Err(Error::Measure("discrete solver needs bounded support".into()));
    }
    maximize_from(initial_discrete(lattice, lambda, opts.seed)?, lambda, measure, opts)
}

/// Maximize `Q` on `||f||^2 = lambda` starting from `f0` (rescaled onto the
/// sphere first).
pub fn maximize_from<F: Field>(
    f0: F,
    lambda: f64,
    measure: &QuadMeasure,
    opts: &SolverOptions,
) -> Result<(F, SolveReport)> {
    check_lambda(lambda)?;
    opts.validate()?;
    let fun = Functional::for_field(&f0, measure);
    let sqrt_lambda = lambda.sqrt();
    let mut f = f0.normalized(lambda)?;
    let mut drift = Vec::new();
    let mut step = opts.step;
    let mut iterations = 0;
    let (mut q, mut phi) = evaluate(&fun, &f)?;
    loop {
        drift.push(f.centroid_pair()?);
        let omega = phi / lambda;
        let residual = fun.residual_from(&f, &q, omega, 0.0).unwrap_or(f64::INFINITY);
        let converged = residual <= opts.tol;
        if converged || iterations >= opts.max_iter {
            let tails = tail_diagnostics(&f, &levels_for(lambda))?;
            let report = SolveReport {
                method: opts.method,
                lambda,
                d_av: 0.0,
                omega,
                p_value: phi,
                energy: None,
                residual,
                iterations,
                converged,
                threshold_suspected: false,
                tails,
                centroid_drift: drift,
            };
            return Ok((f, report));
        }
        iterations += 1;
        let q_norm = q.norm();
        if q_norm < 1e-14 {
            return Err(Error::Stalled);
        }
        let mut next = match opts.method {
            Method::SpectralRenormalization => {
                let theta = opts.damping;
                f.scaled(Complex64::new(1.0 - theta, 0.0))
                    .axpy(Complex64::new(theta * sqrt_lambda / q_norm, 0.0), &q)
                    .normalized(lambda)?
            }
            Method::ProjectedAscent => {
                let mut accepted = None;
                for _ in 0..60 {
                    let trial = f.axpy(Complex64::new(4.0 * step, 0.0), &q).normalized(lambda)?;
                    let value = fun.phi(&trial)?;
                    if value >= phi {
                        accepted = Some(trial);
                        break;
                    }
                    step *= 0.5;
                }
                match accepted {
                    Some(t) => t,
                    None => return Err(Error::Stalled),
                }
            }
        };
        if opts.recenter {
            next = next.recentered()?.0;
        }
        f = next;
        (q, phi) = evaluate(&fun, &f)?;
    }
}

fn evaluate<F: Field>(fun: &Functional, f: &F) -> Result<(F, f64)> {
    let q = fun.q3(f, f, f)?;
    let phi = f.inner(&q).re;
    Ok((q, phi))
}

fn levels_for(lambda: f64) -> Vec<f64> {
    let norm = lambda.sqrt();
    DEFAULT_TAIL_LEVELS.iter().map(|e| e * norm).collect()
}

/// Minimize `H(f) = (d_av/2)<f,Af> - Q/4` on `||f||^2 = lambda` by
/// preconditioned projected gradient descent
/// `f <- normalize((1 + tau d_av A)^{-1} (f + tau (Q(f,f,f) - omega f)))`,
/// whose fixed points are exactly the solutions of
/// `-omega f = d_av A f - Q(f,f,f)`. The step `tau` is halved whenever
/// `H` would increase.
pub fn minimize_energy<F: Field>(
    f0: F,
    lambda: f64,
    d_av: f64,
    measure: &QuadMeasure,
    opts: &SolverOptions,
) -> Result<(F, SolveReport)> {
    check_lambda(lambda)?;
    opts.validate()?;
    if !(d_av > 0.0 && d_av.is_finite()) {
        return Err(Error::OutOfRange {
            name: "d_av",
            value: d_av,
            expected: "> 0",
        });
    }
    let fun = Functional::for_field(&f0, measure);
    let mut f = f0.normalized(lambda)?;
    let mut tau = opts.step;
    let mut drift = Vec::new();
    let mut iterations = 0;
    let mut always_nonnegative = true;
    let mut delocalized = false;
    let mut state = energy_state(&fun, &f, d_av, lambda)?;
    loop {
        drift.push(f.centroid_pair()?);
        always_nonnegative &= state.h >= 0.0;
        let residual = if state.omega > 0.0 {
            fun.residual_from(&f, &state.q, state.omega, d_av)?
        } else {
            f64::INFINITY
        };
        let converged = residual <= opts.tol;
        if converged || iterations >= opts.max_iter || delocalized {
            let tails = tail_diagnostics(&f, &levels_for(lambda))?;
            let threshold_suspected = !converged && (always_nonnegative || delocalized || state.omega <= 0.0);
            let report = SolveReport {
                method: opts.method,
                lambda,
                d_av,
                omega: state.omega,
                p_value: state.phi,
                energy: Some(state.h),
                residual,
                iterations,
                converged,
                threshold_suspected,
                tails,
                centroid_drift: drift,
            };
            return Ok((f, report));
        }
        iterations += 1;
        let mut accepted = None;
        for _ in 0..60 {
            let push = f.axpy(
                Complex64::new(tau, 0.0),
                &state.q.axpy(Complex64::new(-state.omega, 0.0), &f),
            );
            let mut trial = fun.resolvent(&push, tau * d_av)?.normalized(lambda)?;
            if opts.recenter {
                trial = trial.recentered()?.0;
            }
            let next = energy_state(&fun, &trial, d_av, lambda)?;
            if next.h <= state.h + 1e-15 * state.h.abs() {
                accepted = Some((trial, next));
                break;
            }
            tau *= 0.5;
        }
        match accepted {
            Some((trial, next)) => {
                f = trial;
                state = next;
                tau = (tau * 1.5).min(opts.step * 64.0);
            }
            None => return Err(Error::Stalled),
        }
        delocalized = edge_fraction(&f) > 1e-10;
    }
}

struct EnergyState<F> {
    q: F,
    phi: f64,
    h: f64,
    omega: f64,
}

fn energy_state<F: Field>(fun: &Functional, f: &F, d_av: f64, lambda: f64) -> Result<EnergyState<F>> {
    let (q, phi) = evaluate(fun, f)?;
    let stiffness = fun.stiffness(f)?;
    Ok(EnergyState {
        q,
        phi,
        h: 0.5 * d_av * stiffness - 0.25 * phi,
        omega: (phi - d_av * stiffness) / lambda,
    })
}

/// Fraction of the mass on the outer 10% of the domain, both sides.
pub fn edge_fraction<F: Field>(f: &F) -> f64 {
    let s = f.samples();
    let n = s.len();
    let cut = (n as f64 * 0.05).ceil() as usize;
    let edge: f64 = s[..cut].iter().chain(&s[n - cut..]).map(|z| z.norm_sqr()).sum();
    let total: f64 = s.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        0.0
    } else {
        edge / total
    }
}
