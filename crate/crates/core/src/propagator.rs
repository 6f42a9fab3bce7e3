//! Free Schrödinger evolutions on the line and on the lattice.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPair;
use crate::field::{Field, Grid, Lattice, LatticeField, WaveField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest `|offset|` the series oracle accepts.
pub const ORACLE_OFFSET_BUDGET: i64 = 200;

/// Spectral propagator `e^{ir d^2}` (multiplier `e^{-irk^2}`) for one grid.
#[derive(Clone, Debug)]
pub struct GridPropagator {
    plans: FftPair,
    k2: Vec<f64>,
}

impl GridPropagator {
    pub fn new(grid: Grid) -> Self {
        Self {
            plans: FftPair::new(grid.len()),
            k2: grid.fft_wavenumbers().iter().map(|k| k * k).collect(),
        }
    }

    /// Unnormalized FFT of the samples.
    pub fn spectrum(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let mut buf = samples.to_vec();
        self.plans.forward(&mut buf);
        buf
    }

    /// Back to real space after applying `e^{-irk^2}` to a spectrum.
    pub fn evolve_spectrum(&self, spectrum: &[Complex64], r: f64) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = spectrum
            .iter()
            .zip(&self.k2)
            .map(|(z, k2)| z * (-I * r * k2).exp())
            .collect();
        self.plans.inverse(&mut buf);
        buf
    }

    pub fn evolve(&self, samples: &[Complex64], r: f64) -> Vec<Complex64> {
        if r == 0.0 {
            return samples.to_vec();
        }
        self.evolve_spectrum(&self.spectrum(samples), r)
    }

    /// `-d^2` applied spectrally.
    pub fn laplace(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let mut buf = self.spectrum(samples);
        for (z, k2) in buf.iter_mut().zip(&self.k2) {
            *z *= k2;
        }
        self.plans.inverse(&mut buf);
        buf
    }

    pub(crate) fn k2(&self) -> &[f64] {
        &self.k2
    }

    pub(crate) fn plans(&self) -> &FftPair {
        &self.plans
    }
}

/// `T_r f` with `T_r = e^{ir d^2}`.
pub fn free_evolve_cont(field: &WaveField, r: f64) -> WaveField {
    let p = GridPropagator::new(field.grid());
    field.with_samples(p.evolve(field.samples(), r))
}

/// Result of a lattice evolution.
#[derive(Clone, Debug)]
pub struct LatticeEvolution {
    pub field: LatticeField,
    /// Set when input or output carries more than `1e-10` of its mass on the
    /// outer 10% of the lattice, so periodization may have polluted the result.
    pub truncation_warning: bool,
}

/// Spectral propagator `e^{ir Delta}` on the periodized lattice.
#[derive(Clone, Debug)]
pub struct LatticePropagator {
    plans: FftPair,
    symbol: Vec<f64>,
}

impl LatticePropagator {
    pub fn new(lattice: Lattice) -> Self {
        Self {
            plans: FftPair::new(lattice.len()),
            symbol: lattice.fft_momenta().iter().map(|q| 2.0 * q.cos() - 2.0).collect(),
        }
    }

    pub fn evolve(&self, values: &[Complex64], r: f64) -> Vec<Complex64> {
        if r == 0.0 {
            return values.to_vec();
        }
        let mut buf = values.to_vec();
        self.plans.forward(&mut buf);
        for (z, s) in buf.iter_mut().zip(&self.symbol) {
            *z *= (I * r * s).exp();
        }
        self.plans.inverse(&mut buf);
        buf
    }
}

/// `S_r f` with `S_r = e^{ir Delta}`.
pub fn free_evolve_disc(field: &LatticeField, r: f64) -> LatticeEvolution {
    let p = LatticePropagator::new(field.lattice());
    let out = field.with_samples(p.evolve(field.samples(), r));
    let threshold = 1e-10 * field.norm_sqr();
    let truncation_warning = field.edge_mass() > threshold || out.edge_mass() > threshold;
    LatticeEvolution {
        field: out,
        truncation_warning,
    }
}

/// `J_n(x)` from the ascending series. The alternating tail is bounded by its
/// first omitted term once terms decrease, which is the stopping rule.
/// Reliable for `|x| <= 10`; cancellation grows beyond that.
pub fn bessel_j_series(order: i64, x: f64) -> f64 {
    let n = order.unsigned_abs();
    let parity = |v: f64, odd: bool| if odd { -v } else { v };
    let odd_n = n % 2 == 1;
    let flip = (order < 0 && odd_n) ^ (x < 0.0 && odd_n);
    let h = 0.5 * x.abs();
    if h == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let mut term = 1.0;
    for j in 1..=n {
        term *= h / j as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let h2 = h * h;
    let mut sum = term;
    let mut k = 0u64;
    loop {
        k += 1;
        term *= -h2 / (k as f64 * (k + n) as f64);
        sum += term;
        let decreasing = h2 < ((k + 1) * (k + 1 + n)) as f64;
        if decreasing && term.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            break;
        }
        if term == 0.0 {
            break;
        }
    }
    parity(sum, flip)
}

/// `<x| e^{ir Delta} |y>` for `offset = x - y`, from
/// `e^{-2ir} i^offset J_offset(2r)` with the series Bessel function.
pub fn disc_kernel_oracle(offset: i64, r: f64) -> Result<Complex64> {
    if offset.abs() > ORACLE_OFFSET_BUDGET {
        return Err(Error::OffsetBudget(offset));
    }
    let d = offset.unsigned_abs();
    let phase = I.powu(d as u32);
    Ok((-2.0 * I * r).exp() * phase * bessel_j_series(d as i64, 2.0 * r))
}

/// `J_0(x), ..., J_nmax(x)` by Miller's backward recurrence, normalized
/// with `J_0 + 2 sum J_2k = 1`. Entries keep full relative accuracy far
/// into the decaying tail.
pub fn bessel_j_row(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = nmax.max(ax as usize) + 20 + (40.0 * (nmax.max(ax as usize) + 1) as f64).sqrt() as usize;
    let start = top + top % 2;
    let mut next = 0.0;
    let mut cur = 1e-300;
    let mut norm = 0.0;
    let mut row = vec![0.0; start + 1];
    row[start] = cur;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        row[k - 1] = cur;
        if cur.abs() > 1e250 {
            for v in row.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            next *= 1e-250;
            cur *= 1e-250;
        }
    }
    for (k, v) in row.iter().enumerate() {
        if k == 0 {
            norm += v;
        } else if k % 2 == 0 {
            norm += 2.0 * v;
        }
    }
    for (k, v) in out.iter_mut().enumerate() {
        let s = if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        *v = s * row[k] / norm;
    }
    out
}

/// Periodized lattice kernel of `e^{ir Delta}` on `P = 2M+1` sites, indexed by
/// offset modulo `P`, built from [`bessel_j_row`].
pub fn periodic_kernel(lattice: Lattice, r: f64) -> Vec<Complex64> {
    let p = lattice.len() as i64;
    let reach = 2 * p;
    let j = bessel_j_row(reach as usize, 2.0 * r);
    let base = (-2.0 * I * r).exp();
    let mut kernel = vec![Complex64::new(0.0, 0.0); p as usize];
    for d in -reach..=reach {
        let a = d.unsigned_abs() as usize;
        let v = base * I.powu((a % 4) as u32) * j[a];
        kernel[d.rem_euclid(p) as usize] += v;
    }
    kernel
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const J1_AT_1: f64 = 0.440_050_585_744_933_5;
    const J2_AT_1: f64 = 0.114_903_484_931_900_5;

    #[test]
    fn series_matches_reference_values() {
        assert_relative_eq!(bessel_j_series(1, 1.0), J1_AT_1, max_relative = 1e-14);
        assert_relative_eq!(bessel_j_series(2, 1.0), J2_AT_1, max_relative = 1e-14);
        assert_relative_eq!(bessel_j_series(-1, 1.0), -J1_AT_1, max_relative = 1e-14);
        assert_relative_eq!(bessel_j_series(1, -1.0), -J1_AT_1, max_relative = 1e-14);
        assert_eq!(bessel_j_series(0, 0.0), 1.0);
    }

    #[test]
    fn miller_row_agrees_with_series() {
        for &x in &[0.3, 1.0, 2.5, 4.0, -3.0] {
            let row = bessel_j_row(40, x);
            for (n, v) in row.iter().enumerate() {
                let s = bessel_j_series(n as i64, x);
                assert!((v - s).abs() <= 1e-14 + 1e-11 * s.abs(), "n={n} x={x}: {v} vs {s}");
            }
        }
    }

    #[test]
    fn oracle_agrees_with_matrix_exponential_series() {
        // Taylor series of e^{ir Delta} applied to a delta on a lattice wide
        // enough that the boundary is never reached.
        let m = 40usize;
        let n = 2 * m + 1;
        for &r in &[0.5, -1.3, 2.0] {
            let mut term = vec![Complex64::new(0.0, 0.0); n];
            term[m] = Complex64::new(1.0, 0.0);
            let mut acc = term.clone();
            for k in 1..120 {
                let mut next = vec![Complex64::new(0.0, 0.0); n];
                for j in 1..n - 1 {
                    next[j] = (term[j - 1] + term[j + 1] - 2.0 * term[j]) * I * r / k as f64;
                }
                term = next;
                for (a, t) in acc.iter_mut().zip(&term) {
                    *a += t;
                }
            }
            for d in -20i64..=20 {
                let want = acc[(m as i64 + d) as usize];
                let got = disc_kernel_oracle(d, r).unwrap();
                assert!((want - got).norm() < 1e-12, "d={d} r={r}");
            }
        }
    }

    #[test]
    fn oracle_budget() {
        assert!(disc_kernel_oracle(200, 0.5).is_ok());
        assert!(matches!(disc_kernel_oracle(-201, 0.5), Err(Error::OffsetBudget(-201))));
        assert_eq!(disc_kernel_oracle(0, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        assert_relative_eq!(
            disc_kernel_oracle(1, 0.5).unwrap().norm(),
            J1_AT_1,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            disc_kernel_oracle(2, 0.5).unwrap().norm(),
            J2_AT_1,
            max_relative = 1e-14
        );
    }

    #[test]
    fn periodic_kernel_matches_spectral_evolution() {
        let lattice = Lattice::new(16).unwrap();
        let delta = LatticeField::delta(lattice, 0).unwrap();
        for &r in &[0.7, -2.0, 5.0] {
            let spectral = free_evolve_disc(&delta, r).field;
            let kernel = periodic_kernel(lattice, r);
            let p = lattice.len() as i64;
            for x in lattice.sites() {
                let k = kernel[x.rem_euclid(p) as usize];
                assert!((k - spectral.at(x)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn gaussian_peak_after_unit_time() {
        let grid = Grid::new(256, 40.0).unwrap();
        let a0 = (2.0 / std::f64::consts::PI).powf(0.25);
        let f = WaveField::from_fn(grid, |x| Complex64::new(a0 * (-x * x).exp(), 0.0));
        let g = free_evolve_cont(&f, 1.0);
        let centre = g.samples()[grid.len() / 2].norm();
        assert!((centre - 0.439_903_887_981_412).abs() < 1e-6);
        assert_eq!(free_evolve_cont(&f, 0.0), f);
    }
}
