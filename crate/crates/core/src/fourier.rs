//! Thin wrapper over `rustfft` with the conventions used throughout:
//! forward `F_j = Σ_m f_m e^{−2πi jm/n}`, inverse without the `1/n`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone)]
pub(crate) struct Fourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fourier {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fourier {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n);
        self.forward.process(data);
    }

    pub(crate) fn inverse_unnormalized(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n);
        self.inverse.process(data);
    }

    /// Inverse with the `1/n` so that `inverse(forward(f)) = f`.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.inverse_unnormalized(data);
        let s = 1.0 / self.n as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

/// Angular wave numbers of a length-`n` DFT on spacing `dx`, in FFT order.
pub(crate) fn fft_wavenumbers(n: usize, dx: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * dx);
    (0..n)
        .map(|j| {
            let j = if j < n / 2 { j as isize } else { j as isize - n as isize };
            j as f64 * dk
        })
        .collect()
}
