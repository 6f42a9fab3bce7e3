//! Dispersion profiles and the measures they induce.

use crate::error::{Error, Result};

const TOL: f64 = 1e-12;

/// Constant piece `value` of `d0` on `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

/// Piecewise-constant mean-zero profile `d0` on `[-1, 1]` together with the
/// average dispersion `d_av` and the modulation scale `eps`, so that the
/// physical dispersion is `d(t) = d0(t/eps)/eps + d_av`.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionProfile {
    segments: Vec<Segment>,
    d_av: f64,
    eps: f64,
}

impl DispersionProfile {
    pub fn new(segments: Vec<Segment>, d_av: f64, eps: f64) -> Result<Self> {
        let first = segments.first().ok_or_else(|| Error::Profile("no segments".into()))?;
        if (first.start + 1.0).abs() > TOL {
            return Err(Error::Profile(format!(
                "first segment starts at {} instead of -1",
                first.start
            )));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.end > s.start) || !s.value.is_finite() {
                return Err(Error::Profile(format!("segment {i} is empty or not finite")));
            }
            if let Some(next) = segments.get(i + 1) {
                if (next.start - s.end).abs() > TOL {
                    return Err(Error::Profile(format!(
                        "gap or overlap between segments {i} and {}",
                        i + 1
                    )));
                }
            }
        }
        let last = segments.last().unwrap();
        if (last.end - 1.0).abs() > TOL {
            return Err(Error::Profile(format!(
                "last segment ends at {} instead of 1",
                last.end
            )));
        }
        let mean: f64 = segments.iter().map(|s| s.value * (s.end - s.start)).sum();
        if mean.abs() > TOL {
            return Err(Error::Profile(format!("profile integral is {mean}, not 0")));
        }
        if !(d_av >= 0.0 && d_av.is_finite()) {
            return Err(Error::OutOfRange {
                name: "d_av",
                value: d_av,
                expected: ">= 0",
            });
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::OutOfRange {
                name: "eps",
                value: eps,
                expected: "> 0",
            });
        }
        Ok(Self { segments, d_av, eps })
    }

    /// `d0 = 1` on `[-1, 0)`, `-1` on `[0, 1)`.
    pub fn standard(d_av: f64, eps: f64) -> Result<Self> {
        Self::new(
            vec![
                Segment {
                    start: -1.0,
                    end: 0.0,
                    value: 1.0,
                },
                Segment {
                    start: 0.0,
                    end: 1.0,
                    value: -1.0,
                },
            ],
            d_av,
            eps,
        )
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn d_av(&self) -> f64 {
        self.d_av
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.segments.clone(), self.d_av, eps)
    }

    /// Segment boundaries, including both ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.segments.iter().map(|s| s.start).collect();
        b.push(1.0);
        b
    }

    fn accumulate(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for s in &self.segments {
            if t <= s.start {
                break;
            }
            acc += s.value * (t.min(s.end) - s.start);
        }
        acc
    }

    /// `d0` extended 2-periodically.
    pub fn d0_periodic(&self, t: f64) -> f64 {
        let s = wrap(t);
        self.segments
            .iter()
            .find(|seg| s >= seg.start && s < seg.end)
            .unwrap_or(self.segments.last().unwrap())
            .value
    }

    /// `D` extended 2-periodically to the whole line.
    pub fn cumulative_periodic(&self, t: f64) -> f64 {
        self.accumulate(wrap(t))
    }

    pub fn max_abs_d(&self) -> f64 {
        self.breakpoints()
            .iter()
            .map(|&t| self.accumulate(t).abs())
            .fold(0.0, f64::max)
    }
}

fn wrap(t: f64) -> f64 {
    (t + 1.0).rem_euclid(2.0) - 1.0
}

/// `D(t) = int_{-1}^t d0(s) ds` for `t` in `[-1, 1]`.
pub fn cumulative_d(profile: &DispersionProfile, t: f64) -> Result<f64> {
    if !(-1.0 - TOL..=1.0 + TOL).contains(&t) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            expected: "[-1, 1]",
        });
    }
    Ok(profile.accumulate(t.clamp(-1.0, 1.0)))
}

/// Finite measure `sum_i w_i delta_{r_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadMeasure {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadMeasure {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Measure("no nodes".into()));
        }
        if nodes.len() != weights.len() {
            return Err(Error::Measure(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if let Some(i) = nodes.iter().position(|r| !r.is_finite()) {
            return Err(Error::Measure(format!("node {i} is not finite")));
        }
        if let Some(i) = weights.iter().position(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::Measure(format!("weight {i} is negative or not finite")));
        }
        Ok(Self { nodes, weights })
    }

    pub fn single(node: f64, weight: f64) -> Result<Self> {
        Self::new(vec![node], vec![weight])
    }

    /// 64-point Gauss–Legendre rule on `[0, 1]`: the measure with density
    /// `1_[0,1]`.
    pub fn uniform01() -> Self {
        Self::gauss_legendre_on(0.0, 1.0, 64)
    }

    /// Gauss–Legendre rule with `n` nodes for Lebesgue measure on `[a, b]`.
    pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let h = 0.5 * (b - a);
        Self {
            nodes: x.iter().map(|t| a + h * (t + 1.0)).collect(),
            weights: w.iter().map(|v| v * h).collect(),
        }
    }

    /// Built-in measures by name.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "uniform01" => Some(Self::uniform01()),
            _ => None,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn support_radius(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn moment(&self, m: i32) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(r, w)| w * r.powi(m)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Midpoint-rule image of `(1/2) dt` on `[-1, 1]` under `D`.
pub fn pushforward_measure(profile: &DispersionProfile, n_nodes: usize) -> Result<QuadMeasure> {
    if n_nodes == 0 {
        return Err(Error::OutOfRange {
            name: "n_nodes",
            value: 0.0,
            expected: ">= 1",
        });
    }
    let n = n_nodes as f64;
    let nodes = (1..=n_nodes)
        .map(|i| profile.accumulate(-1.0 + (2 * i - 1) as f64 / n))
        .collect();
    QuadMeasure::new(nodes, vec![1.0 / n; n_nodes])
}

/// Density of the pushforward measure at `tau`: half the sum of `1/|d0|`
/// over the preimages of `tau` in `[-1, 1]`.
pub fn density_psi(profile: &DispersionProfile, tau: f64) -> Result<f64> {
    let critical = profile
        .breakpoints()
        .iter()
        .map(|&t| profile.accumulate(t))
        .any(|d| (d - tau).abs() <= TOL);
    if critical {
        return Err(Error::CriticalValue(tau));
    }
    let mut psi = 0.0;
    for s in profile.segments() {
        let d0 = profile.accumulate(s.start);
        let d1 = profile.accumulate(s.end);
        if s.value == 0.0 {
            if (d0 - tau).abs() <= TOL {
                return Err(Error::CriticalValue(tau));
            }
            continue;
        }
        if (tau - d0) * (tau - d1) < 0.0 {
            psi += 0.5 / s.value.abs();
        }
    }
    Ok(psi)
}

/// Image of a measure under `r -> -1/(4r)` with weights `w / (2|r|)`.
pub fn dual_measure(measure: &QuadMeasure) -> Result<QuadMeasure> {
    if let Some((index, &node)) = measure.nodes().iter().enumerate().find(|(_, r)| r.abs() < 1e-8) {
        return Err(Error::NodeNearZero { index, node });
    }
    let nodes = measure.nodes().iter().map(|r| -1.0 / (4.0 * r)).collect();
    let weights = measure.iter().map(|(r, w)| w / (2.0 * r.abs())).collect();
    QuadMeasure::new(nodes, weights)
}
