//! Shared transform helpers.
//!
//! Convention used throughout the crate: unnormalized forward transform,
//! `1/N`-scaled inverse transform, so `inverse(forward(x)) == x`.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan_forward(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

fn plan_inverse(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Forward transform of a real sequence.
pub(crate) fn forward(time: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = time.iter().map(|&re| Complex::new(re, 0.0)).collect();
    plan_forward(buf.len()).process(&mut buf);
    buf
}

/// Scaled inverse transform.
pub(crate) fn inverse(bins: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let mut buf = bins.to_vec();
    plan_inverse(buf.len()).process(&mut buf);
    let scale = 1.0 / buf.len() as f64;
    for b in &mut buf {
        *b *= scale;
    }
    buf
}

/// Scaled inverse transform, keeping only the real part.
///
/// Valid for spectra with (approximate) conjugate symmetry; the imaginary
/// residue is rounding noise and is dropped.
pub(crate) fn inverse_real(bins: &[Complex<f64>]) -> Vec<f64> {
    inverse(bins).iter().map(|c| c.re).collect()
}
