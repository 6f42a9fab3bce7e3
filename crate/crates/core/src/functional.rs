//! The four-linear functional, its trilinear form, energy and GT residual.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispersion::QuadMeasure;
use crate::error::{Error, Result};
use crate::fft::FftPair;
use crate::field::{ChirpedGaussian, Domain, Field};
use crate::propagator::{periodic_kernel, GridPropagator};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug)]
enum Engine {
    /// Spectral evolution; fields are carried as FFT spectra.
    Grid(GridPropagator),
    /// Direct convolution with the periodized Bessel kernel of every node.
    Lattice(Vec<Vec<Complex64>>),
}

/// `Q_mu` on a fixed domain and measure, with per-node evolution data
/// precomputed.
///
/// On the lattice the evolutions are direct convolutions rather than FFTs:
/// the tails of lattice solitons sit hundreds of orders of magnitude below
/// their peak, and only the convolution keeps them at full relative accuracy.
#[derive(Clone, Debug)]
pub struct Functional {
    domain: Domain,
    measure: QuadMeasure,
    engine: Engine,
}

impl Functional {
    pub fn new(domain: Domain, measure: QuadMeasure) -> Self {
        let engine = match domain {
            Domain::Grid(g) => Engine::Grid(GridPropagator::new(g)),
            Domain::Lattice(l) => Engine::Lattice(measure.nodes().par_iter().map(|&r| periodic_kernel(l, r)).collect()),
        };
        Self {
            domain,
            measure,
            engine,
        }
    }

    pub fn for_field<F: Field>(field: &F, measure: &QuadMeasure) -> Self {
        Self::new(field.domain(), measure.clone())
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn measure(&self) -> &QuadMeasure {
        &self.measure
    }

    fn check<F: Field>(&self, fields: &[&F]) -> Result<()> {
        if fields.iter().all(|f| f.domain() == self.domain) {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    fn prepare(&self, samples: &[Complex64]) -> Vec<Complex64> {
        match &self.engine {
            Engine::Grid(p) => p.spectrum(samples),
            Engine::Lattice(_) => samples.to_vec(),
        }
    }

    /// `U_{r_i}` applied to prepared data.
    fn forward_at(&self, prepared: &[Complex64], node: usize) -> Vec<Complex64> {
        match &self.engine {
            Engine::Grid(p) => p.evolve_spectrum(prepared, self.measure.nodes()[node]),
            Engine::Lattice(kernels) => convolve(&kernels[node], prepared, false),
        }
    }

    /// `U_{r_i}^{-1}` applied to real-space data, returned in prepared form.
    fn backward_at(&self, samples: &[Complex64], node: usize) -> Vec<Complex64> {
        match &self.engine {
            Engine::Grid(p) => {
                let r = self.measure.nodes()[node];
                let mut s = p.spectrum(samples);
                for (z, k2) in s.iter_mut().zip(p.k2()) {
                    *z *= (I * r * k2).exp();
                }
                s
            }
            Engine::Lattice(kernels) => convolve(&kernels[node], samples, true),
        }
    }

    fn finish(&self, mut prepared: Vec<Complex64>) -> Vec<Complex64> {
        if let Engine::Grid(p) = &self.engine {
            p.plans().inverse(&mut prepared);
        }
        prepared
    }

    /// `U_{r_i} f` for every node of the measure.
    pub fn evolutions<F: Field>(&self, f: &F) -> Result<Vec<F>> {
        self.check(&[f])?;
        let prep = self.prepare(f.samples());
        Ok((0..self.measure.len())
            .into_par_iter()
            .map(|i| f.with_samples(self.forward_at(&prep, i)))
            .collect())
    }

    /// `sum_i w_i int conj(U f1) (U f2) conj(U f3) (U f4)`.
    pub fn q4<F: Field>(&self, f1: &F, f2: &F, f3: &F, f4: &F) -> Result<Complex64> {
        self.check(&[f1, f2, f3, f4])?;
        let fields = [f1, f2, f3, f4];
        let mut slot = [0usize; 4];
        let mut distinct: Vec<Vec<Complex64>> = Vec::with_capacity(4);
        for (k, f) in fields.iter().enumerate() {
            match fields[..k].iter().position(|g| std::ptr::eq(*g, *f)) {
                Some(j) => slot[k] = slot[j],
                None => {
                    slot[k] = distinct.len();
                    distinct.push(self.prepare(f.samples()));
                }
            }
        }
        let cell = f1.cell();
        let terms: Vec<Complex64> = (0..self.measure.len())
            .into_par_iter()
            .map(|i| {
                let ev: Vec<Vec<Complex64>> = distinct.iter().map(|d| self.forward_at(d, i)).collect();
                let (a, b, c, d) = (&ev[slot[0]], &ev[slot[1]], &ev[slot[2]], &ev[slot[3]]);
                let s: Complex64 = (0..a.len()).map(|x| a[x].conj() * b[x] * c[x].conj() * d[x]).sum();
                s * cell * self.measure.weights()[i]
            })
            .collect();
        Ok(terms.into_iter().sum())
    }

    /// `sum_i w_i U^{-1}[ (U v1) conj(U v2) (U v3) ]`, so that
    /// `<g, q3(f, f, f)> = q4(g, f, f, f)`.
    pub fn q3<F: Field>(&self, v1: &F, v2: &F, v3: &F) -> Result<F> {
        self.check(&[v1, v2, v3])?;
        let same12 = std::ptr::eq(v1, v2);
        let same13 = std::ptr::eq(v1, v3);
        let p1 = self.prepare(v1.samples());
        let p2 = (!same12).then(|| self.prepare(v2.samples()));
        let p3 = (!same13).then(|| self.prepare(v3.samples()));
        let parts: Vec<Vec<Complex64>> = (0..self.measure.len())
            .into_par_iter()
            .map(|i| {
                let a = self.forward_at(&p1, i);
                let b = p2.as_ref().map(|p| self.forward_at(p, i));
                let c = p3.as_ref().map(|p| self.forward_at(p, i));
                let b = b.as_ref().unwrap_or(&a);
                let c = c.as_ref().unwrap_or(&a);
                let prod: Vec<Complex64> = (0..a.len()).map(|x| a[x] * b[x].conj() * c[x]).collect();
                let w = self.measure.weights()[i];
                self.backward_at(&prod, i).into_iter().map(|z| z * w).collect()
            })
            .collect();
        let mut acc = vec![ZERO; v1.samples().len()];
        for part in parts {
            for (a, p) in acc.iter_mut().zip(part) {
                *a += p;
            }
        }
        Ok(v1.with_samples(self.finish(acc)))
    }

    /// `phi(f) = Q(f, f, f, f)`, real up to rounding.
    pub fn phi<F: Field>(&self, f: &F) -> Result<f64> {
        Ok(self.q4(f, f, f, f)?.re)
    }

    /// Riesz representative of the real derivative of `phi`:
    /// `d/de phi(f + e h) = Re <h, gradient(f)>`.
    pub fn gradient<F: Field>(&self, f: &F) -> Result<F> {
        Ok(self.q3(f, f, f)?.scaled(Complex64::new(4.0, 0.0)))
    }

    /// `A = -d^2` on a grid, `A = -Delta` on a lattice.
    pub fn apply_a<F: Field>(&self, f: &F) -> Result<F> {
        self.check(&[f])?;
        Ok(f.with_samples(apply_a_samples(&self.engine, f.samples())))
    }

    /// `(1 + c A)^{-1} f` for `c >= 0`.
    pub fn resolvent<F: Field>(&self, f: &F, c: f64) -> Result<F> {
        self.check(&[f])?;
        let n = f.samples().len();
        let symbol: Vec<f64> = match (&self.engine, self.domain) {
            (Engine::Grid(p), _) => p.k2().to_vec(),
            (_, Domain::Lattice(l)) => l.fft_momenta().iter().map(|q| 2.0 - 2.0 * q.cos()).collect(),
            _ => unreachable!(),
        };
        let plans = FftPair::new(n);
        let mut buf = f.samples().to_vec();
        plans.forward(&mut buf);
        for (z, s) in buf.iter_mut().zip(&symbol) {
            *z /= 1.0 + c * s;
        }
        plans.inverse(&mut buf);
        Ok(f.with_samples(buf))
    }

    /// `<f, A f>`.
    pub fn stiffness<F: Field>(&self, f: &F) -> Result<f64> {
        Ok(f.inner(&self.apply_a(f)?).re)
    }

    /// `H(f) = (d_av/2) <f, Af> - Q(f,f,f,f)/4`.
    pub fn energy<F: Field>(&self, f: &F, d_av: f64) -> Result<f64> {
        let kinetic = if d_av == 0.0 { 0.0 } else { self.stiffness(f)? };
        Ok(0.5 * d_av * kinetic - 0.25 * self.phi(f)?)
    }

    /// `||Q(f,f,f) - d_av A f - omega f|| / (omega ||f||)`.
    pub fn gt_residual<F: Field>(&self, f: &F, omega: f64, d_av: f64) -> Result<f64> {
        let q = self.q3(f, f, f)?;
        self.residual_from(f, &q, omega, d_av)
    }

    pub(crate) fn residual_from<F: Field>(&self, f: &F, q: &F, omega: f64, d_av: f64) -> Result<f64> {
        let norm = f.norm();
        if norm == 0.0 {
            return Err(Error::ZeroField);
        }
        if !(omega > 0.0) {
            return Err(Error::OutOfRange {
                name: "omega",
                value: omega,
                expected: "> 0",
            });
        }
        let mut r = q.axpy(Complex64::new(-omega, 0.0), f);
        if d_av != 0.0 {
            r = r.axpy(Complex64::new(-d_av, 0.0), &self.apply_a(f)?);
        }
        Ok(r.norm() / (omega * norm))
    }
}

fn apply_a_samples(engine: &Engine, s: &[Complex64]) -> Vec<Complex64> {
    match engine {
        Engine::Grid(p) => p.laplace(s),
        Engine::Lattice(_) => {
            let n = s.len();
            (0..n)
                .map(|j| 2.0 * s[j] - s[(j + n - 1) % n] - s[(j + 1) % n])
                .collect()
        }
    }
}

/// Circular convolution `g[x] = sum_y K[x - y] f[y]`, with `conj(K)` when
/// `adjoint` is set (the kernel is even in the offset).
fn convolve(kernel: &[Complex64], f: &[Complex64], adjoint: bool) -> Vec<Complex64> {
    let p = f.len();
    let support: Vec<(usize, Complex64)> = f.iter().copied().enumerate().filter(|(_, v)| *v != ZERO).collect();
    (0..p)
        .map(|x| {
            support
                .iter()
                .map(|&(y, v)| {
                    let k = kernel[(x + p - y) % p];
                    if adjoint {
                        k.conj() * v
                    } else {
                        k * v
                    }
                })
                .sum()
        })
        .collect()
}

/// `Q(f1, f2, f3, f4)` with the evolution matching the field type.
pub fn q4<F: Field>(f1: &F, f2: &F, f3: &F, f4: &F, measure: &QuadMeasure) -> Result<Complex64> {
    Functional::for_field(f1, measure).q4(f1, f2, f3, f4)
}

pub fn q3<F: Field>(f1: &F, f2: &F, f3: &F, measure: &QuadMeasure) -> Result<F> {
    Functional::for_field(f1, measure).q3(f1, f2, f3)
}

pub fn gradient<F: Field>(f: &F, measure: &QuadMeasure) -> Result<F> {
    Functional::for_field(f, measure).gradient(f)
}

pub fn energy<F: Field>(f: &F, d_av: f64, measure: &QuadMeasure) -> Result<f64> {
    Functional::for_field(f, measure).energy(f, d_av)
}

pub fn gt_residual<F: Field>(f: &F, omega: f64, d_av: f64, measure: &QuadMeasure) -> Result<f64> {
    Functional::for_field(f, measure).gt_residual(f, omega, d_av)
}

/// `Q(g,g,g,g)` for the unit-norm chirped Gaussian of width `sigma0`,
/// `sqrt(Re s)/sqrt(pi) sum_i w_i / sqrt((Re s)^2 + (Im s + 4 r_i)^2)`.
pub fn gaussian_q_oracle(sigma0: Complex64, measure: &QuadMeasure) -> Result<f64> {
    ChirpedGaussian::new(Complex64::new(1.0, 0.0), sigma0)?;
    let (a, b) = (sigma0.re, sigma0.im);
    let s: f64 = measure
        .iter()
        .map(|(r, w)| w / (a * a + (b + 4.0 * r).powi(2)).sqrt())
        .sum();
    Ok(a.sqrt() / PI.sqrt() * s)
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
        if hi - lo < 1e-12 * (1.0 + lo.abs()) {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Largest chirped-Gaussian value of `Q` for a measure: a lower bound for
/// the maximum of `Q` on the unit sphere. With `chirped = false` only real
/// widths are searched.
pub fn best_gaussian(measure: &QuadMeasure, chirped: bool) -> (Complex64, f64) {
    let q = |a: f64, b: f64| gaussian_q_oracle(Complex64::new(a, b), measure).unwrap_or(0.0);
    let scale = 4.0 * measure.support_radius().max(1e-3);
    let best_re = |b: f64| {
        let (la, v) = golden_max(|la| q(la.exp(), b), (1e-4 * scale).ln(), (1e4 * scale).ln());
        (la.exp(), v)
    };
    if !chirped {
        let (a, v) = best_re(0.0);
        return (Complex64::new(a, 0.0), v);
    }
    let span = 2.0 * scale;
    let steps = 80;
    let (mut b0, mut v0) = (0.0, f64::MIN);
    for k in 0..=steps {
        let b = -span + 2.0 * span * k as f64 / steps as f64;
        let v = best_re(b).1;
        if v > v0 {
            b0 = b;
            v0 = v;
        }
    }
    let h = 2.0 * span / steps as f64;
    let (b, _) = golden_max(|b| best_re(b).1, b0 - h, b0 + h);
    let (a, v) = best_re(b);
    (Complex64::new(a, b), v)
}
