use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// Forward/inverse plan pair for one transform length. Plans are shared
/// through a process-wide planner, so constructing this is cheap after the
/// first call for a given length.
#[derive(Clone)]
pub(crate) struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = planner().lock().unwrap_or_else(|e| e.into_inner());
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            scale: 1.0 / len as f64,
        }
    }

    /// Unnormalized forward DFT, `X_m = sum_j x_j e^{-2 pi i jm/n}`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Inverse DFT including the `1/n` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        for v in buf.iter_mut() {
            *v *= self.scale;
        }
    }
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("len", &self.forward.len()).finish()
    }
}
