//! Grids, lattices and the complex fields living on them.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fft::FftPair;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Uniform periodic grid on `[-L/2, L/2)` with `x_j = (j - n/2) dx`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n_points: usize, box_length: f64) -> Result<Self> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::GridSize(n_points));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::BoxLength(box_length));
        }
        Ok(Self {
            n: n_points,
            length: box_length,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// `k_j = 2 pi j / L` for `j` in `[-n/2, n/2)`, ascending.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let half = (self.n / 2) as f64;
        (0..self.n).map(|m| (m as f64 - half) * self.dk()).collect()
    }

    /// Wavenumbers in the order produced by an unshifted FFT; the Nyquist
    /// mode is `-n/2`.
    pub fn fft_wavenumbers(&self) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|m| {
                let j = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                j * self.dk()
            })
            .collect()
    }

    /// Grid of the Fourier variable: same size, spacing `2 pi / L`.
    pub fn dual(&self) -> Grid {
        Grid {
            n: self.n,
            length: 2.0 * PI * self.n as f64 / self.length,
        }
    }
}

/// Truncated integer lattice `{-M, ..., M}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lattice {
    half_width: usize,
}

impl Lattice {
    pub fn new(half_width: usize) -> Result<Self> {
        if half_width == 0 {
            return Err(Error::LatticeSize);
        }
        Ok(Self { half_width })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn len(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn site(&self, j: usize) -> i64 {
        j as i64 - self.half_width as i64
    }

    pub fn index(&self, site: i64) -> Option<usize> {
        let j = site + self.half_width as i64;
        (0..self.len() as i64).contains(&j).then_some(j as usize)
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.len()).map(|j| self.site(j))
    }

    /// Quasi-momenta `2 pi m / (2M+1)` in FFT order.
    pub fn fft_momenta(&self) -> Vec<f64> {
        let p = self.len() as f64;
        (0..self.len()).map(|m| 2.0 * PI * m as f64 / p).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Grid(Grid),
    Lattice(Lattice),
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Grid(g) => write!(f, "grid n={} L={}", g.len(), g.length()),
            Domain::Lattice(l) => write!(f, "lattice M={}", l.half_width()),
        }
    }
}

/// Common interface of [`WaveField`] and [`LatticeField`].
pub trait Field: Clone + fmt::Debug + Send + Sync + Sized {
    fn domain(&self) -> Domain;
    fn samples(&self) -> &[Complex64];
    fn samples_mut(&mut self) -> &mut [Complex64];
    /// New field on the same domain. Panics on a length mismatch.
    fn with_samples(&self, samples: Vec<Complex64>) -> Self;
    /// Quadrature weight of one sample (`dx` or 1).
    fn cell(&self) -> f64;
    /// Physical coordinate of every sample.
    fn coordinates(&self) -> Vec<f64>;
    /// Position and momentum centroids; the momentum is reported as 0 on a
    /// lattice, where only translations are quotiented out.
    fn centroid_pair(&self) -> Result<(f64, f64)>;
    /// Undo the translation (and, on a grid, the boost) of the field so that
    /// its centroids sit at the origin. Returns the field and the centroid
    /// pair that was removed.
    fn recentered(&self) -> Result<(Self, (f64, f64))>;

    fn norm_sqr(&self) -> f64 {
        self.cell() * self.samples().iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self, other> = sum conj(self) other * cell`.
    fn inner(&self, other: &Self) -> Complex64 {
        let s: Complex64 = self
            .samples()
            .iter()
            .zip(other.samples())
            .map(|(a, b)| a.conj() * b)
            .sum();
        s * self.cell()
    }

    fn zeros_like(&self) -> Self {
        self.with_samples(vec![Complex64::new(0.0, 0.0); self.samples().len()])
    }

    fn scaled(&self, c: Complex64) -> Self {
        self.with_samples(self.samples().iter().map(|z| z * c).collect())
    }

    /// `self + c * other`.
    fn axpy(&self, c: Complex64, other: &Self) -> Self {
        self.with_samples(
            self.samples()
                .iter()
                .zip(other.samples())
                .map(|(a, b)| a + c * b)
                .collect(),
        )
    }

    fn is_zero(&self) -> bool {
        self.samples().iter().all(|z| z.norm_sqr() == 0.0)
    }

    /// Rescale to `||f||^2 = lambda`.
    fn normalized(&self, lambda: f64) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroField);
        }
        Ok(self.scaled(Complex64::new(lambda.sqrt() / n, 0.0)))
    }
}

/// Sampled function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct WaveField {
    grid: Grid,
    samples: Vec<Complex64>,
}

impl WaveField {
    pub fn new(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Precondition(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> Complex64) -> Self {
        Self {
            grid,
            samples: (0..grid.len()).map(|j| f(grid.x(j))).collect(),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }
}

impl Field for WaveField {
    fn domain(&self) -> Domain {
        Domain::Grid(self.grid)
    }

    fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        assert_eq!(samples.len(), self.grid.len());
        Self {
            grid: self.grid,
            samples,
        }
    }

    fn cell(&self) -> f64 {
        self.grid.dx()
    }

    fn coordinates(&self) -> Vec<f64> {
        self.grid.positions()
    }

    fn centroid_pair(&self) -> Result<(f64, f64)> {
        centroids(self)
    }

    fn recentered(&self) -> Result<(Self, (f64, f64))> {
        let (xc, kc) = centroids(self)?;
        Ok((shift_boost(self, -xc, -kc).field, (xc, kc)))
    }
}

/// Complex sequence on a [`Lattice`].
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField {
    lattice: Lattice,
    values: Vec<Complex64>,
}

impl LatticeField {
    pub fn new(lattice: Lattice, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::Precondition(format!(
                "{} values for a lattice of {} sites",
                values.len(),
                lattice.len()
            )));
        }
        Ok(Self { lattice, values })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        Self {
            lattice,
            values: vec![Complex64::new(0.0, 0.0); lattice.len()],
        }
    }

    pub fn from_fn(lattice: Lattice, f: impl FnMut(i64) -> Complex64) -> Self {
        Self {
            lattice,
            values: lattice.sites().map(f).collect(),
        }
    }

    /// Kronecker delta at `site`.
    pub fn delta(lattice: Lattice, site: i64) -> Result<Self> {
        let j = lattice.index(site).ok_or(Error::OutOfRange {
            name: "site",
            value: site as f64,
            expected: "inside the lattice",
        })?;
        let mut f = Self::zeros(lattice);
        f.values[j] = Complex64::new(1.0, 0.0);
        Ok(f)
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn at(&self, site: i64) -> Complex64 {
        self.lattice
            .index(site)
            .map_or(Complex64::new(0.0, 0.0), |j| self.values[j])
    }

    /// Periodic translation by `s` sites: `g(x) = f(x - s)`.
    pub fn shifted(&self, s: i64) -> Self {
        let p = self.lattice.len() as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for (j, v) in self.values.iter().enumerate() {
            out[(j as i64 + s).rem_euclid(p) as usize] = *v;
        }
        self.with_samples(out)
    }

    pub fn centroid(&self) -> Result<f64> {
        let mass = self.norm_sqr();
        if mass == 0.0 {
            return Err(Error::ZeroField);
        }
        let m: f64 = self
            .lattice
            .sites()
            .zip(&self.values)
            .map(|(x, v)| x as f64 * v.norm_sqr())
            .sum();
        Ok(m / mass)
    }

    /// Mass carried by the outer 10% of sites on each side.
    pub fn edge_mass(&self) -> f64 {
        let m = self.lattice.half_width() as i64;
        let cut = m - (m as f64 * 0.1).ceil() as i64;
        self.lattice
            .sites()
            .zip(&self.values)
            .filter(|(x, _)| x.abs() > cut)
            .map(|(_, v)| v.norm_sqr())
            .sum()
    }
}

impl Field for LatticeField {
    fn domain(&self) -> Domain {
        Domain::Lattice(self.lattice)
    }

    fn samples(&self) -> &[Complex64] {
        &self.values
    }

    fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        assert_eq!(samples.len(), self.lattice.len());
        Self {
            lattice: self.lattice,
            values: samples,
        }
    }

    fn cell(&self) -> f64 {
        1.0
    }

    fn coordinates(&self) -> Vec<f64> {
        self.lattice.sites().map(|x| x as f64).collect()
    }

    fn centroid_pair(&self) -> Result<(f64, f64)> {
        Ok((self.centroid()?, 0.0))
    }

    fn recentered(&self) -> Result<(Self, (f64, f64))> {
        let xc = self.centroid()?;
        let s = xc.round() as i64;
        Ok((self.shifted(-s), (xc, 0.0)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Unitary grid transform with the continuum `1/sqrt(2 pi)` convention:
/// `fhat(k) = (2 pi)^{-1/2} int f(x) e^{-ikx} dx` (forward). The result lives
/// on [`Grid::dual`], sample `m` sitting at `k_m = (m - n/2) dk`.
pub fn fourier(field: &WaveField, direction: Direction) -> WaveField {
    let grid = field.grid;
    let n = grid.len();
    let plans = FftPair::new(n);
    let sign = |j: usize| if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut buf: Vec<Complex64> = field.samples.iter().enumerate().map(|(j, z)| z * sign(j)).collect();
    let scale = match direction {
        Direction::Forward => {
            plans.forward(&mut buf);
            grid.dx() / (2.0 * PI).sqrt()
        }
        Direction::Inverse => {
            plans.inverse(&mut buf);
            grid.dx() * n as f64 / (2.0 * PI).sqrt()
        }
    };
    for (m, z) in buf.iter_mut().enumerate() {
        *z *= scale * sign(m);
    }
    WaveField {
        grid: grid.dual(),
        samples: buf,
    }
}

#[derive(Clone, Debug)]
pub struct ShiftBoost {
    pub field: WaveField,
    /// True when `xi` is a multiple of `dx` and `v` a multiple of `2 pi / L`,
    /// in which case the operation is exact.
    pub on_grid: bool,
}

fn commensurate(value: f64, unit: f64) -> Option<i64> {
    let q = value / unit;
    let r = q.round();
    ((q - r).abs() < 1e-9).then_some(r as i64)
}

/// Galilei transformation `g(x) = e^{ivx} f(x - xi)`.
pub fn shift_boost(field: &WaveField, xi: f64, v: f64) -> ShiftBoost {
    let grid = field.grid;
    let n = grid.len();
    let shift_cells = commensurate(xi, grid.dx());
    let mut samples = match shift_cells {
        Some(s) => {
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for (j, z) in field.samples.iter().enumerate() {
                out[(j as i64 + s).rem_euclid(n as i64) as usize] = *z;
            }
            out
        }
        None => {
            let plans = FftPair::new(n);
            let mut buf = field.samples.clone();
            plans.forward(&mut buf);
            for (z, k) in buf.iter_mut().zip(grid.fft_wavenumbers()) {
                *z *= (-I * k * xi).exp();
            }
            plans.inverse(&mut buf);
            buf
        }
    };
    if v != 0.0 {
        for (j, z) in samples.iter_mut().enumerate() {
            *z *= (I * v * grid.x(j)).exp();
        }
    }
    ShiftBoost {
        field: WaveField { grid, samples },
        on_grid: shift_cells.is_some() && commensurate(v, grid.dk()).is_some(),
    }
}

/// Position and momentum centroids `(int x|f|^2, int k|fhat|^2) / ||f||^2`.
pub fn centroids(field: &WaveField) -> Result<(f64, f64)> {
    let mass = field.norm_sqr();
    if mass == 0.0 {
        return Err(Error::ZeroField);
    }
    let first_moment = |f: &WaveField| {
        let g = f.grid;
        f.samples
            .iter()
            .enumerate()
            .map(|(j, z)| g.x(j) * z.norm_sqr())
            .sum::<f64>()
            * g.dx()
    };
    let spectrum = fourier(field, Direction::Forward);
    Ok((first_moment(field) / mass, first_moment(&spectrum) / mass))
}

/// `A e^{-x^2 / sigma}` with `Re sigma > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChirpedGaussian {
    pub amplitude: Complex64,
    pub width: Complex64,
}

impl ChirpedGaussian {
    pub fn new(amplitude: Complex64, width: Complex64) -> Result<Self> {
        if !(width.re > 0.0) {
            return Err(Error::OutOfRange {
                name: "Re sigma0",
                value: width.re,
                expected: "> 0",
            });
        }
        Ok(Self { amplitude, width })
    }

    /// Unit L2 norm, real positive amplitude.
    pub fn normalized(width: Complex64) -> Result<Self> {
        let g = Self::new(Complex64::new(1.0, 0.0), width)?;
        let a = 1.0 / g.norm_sqr().sqrt();
        Ok(Self {
            amplitude: Complex64::new(a, 0.0),
            width,
        })
    }

    /// Closed form `|A|^2 sqrt(pi |sigma|^2 / (2 Re sigma))`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitude.norm_sqr() * (PI * self.width.norm_sqr() / (2.0 * self.width.re)).sqrt()
    }

    pub fn value(&self, x: f64) -> Complex64 {
        self.amplitude * (-(x * x) / self.width).exp()
    }

    pub fn sample(&self, grid: Grid) -> WaveField {
        WaveField::from_fn(grid, |x| self.value(x))
    }

    /// Free evolution `e^{it d^2}`: `sigma(t) = sigma + 4it`,
    /// `A(t) = A sqrt(sigma) / sqrt(sigma(t))`.
    pub fn evolved(&self, t: f64) -> Self {
        let width = self.width + 4.0 * I * t;
        Self {
            amplitude: self.amplitude * self.width.sqrt() / width.sqrt(),
            width,
        }
    }

    /// Inverse Fourier transform, again a chirped Gaussian: width `4/sigma`,
    /// amplitude `A sqrt(sigma/2)`.
    pub fn inverse_fourier(&self) -> Self {
        Self {
            amplitude: self.amplitude * (self.width / 2.0).sqrt(),
            width: 4.0 / self.width,
        }
    }
}

/// Random unit-norm superposition of a few boosted Gaussian packets. Each
/// packet is smooth and localized in both `x` and `k`, so the sum is resolved
/// by any grid that holds `[-span, span]` with margin and `|k| <= kmax` with
/// margin.
pub fn random_packets<R: Rng + ?Sized>(grid: Grid, rng: &mut R, packets: usize, span: f64, kmax: f64) -> WaveField {
    let mut samples = vec![Complex64::new(0.0, 0.0); grid.len()];
    for _ in 0..packets.max(1) {
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let center = rng.gen_range(-0.5 * span..0.5 * span);
        let width = rng.gen_range(0.5..2.0);
        let chirp = rng.gen_range(-1.0..1.0);
        let v = rng.gen_range(-0.5 * kmax..0.5 * kmax);
        let g = ChirpedGaussian {
            amplitude: c,
            width: Complex64::new(width, chirp),
        };
        for (j, z) in samples.iter_mut().enumerate() {
            let x = grid.x(j);
            *z += g.value(x - center) * (I * v * x).exp();
        }
    }
    WaveField { grid, samples }
        .normalized(1.0)
        .expect("random packet sum is nonzero")
}

/// Random unit-norm lattice field supported on `|x| <= radius`.
pub fn random_lattice<R: Rng + ?Sized>(lattice: Lattice, rng: &mut R, radius: i64) -> LatticeField {
    LatticeField::from_fn(lattice, |x| {
        if x.abs() <= radius {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .normalized(1.0)
    .expect("random lattice field is nonzero")
}
