//! One overlap-save frequency-domain adaptive filter branch.
//!
//! The filter keeps `2M` complex weight bins and processes `M` new samples
//! per block. Each block window holds the previous block followed by the new
//! one, so consecutive windows overlap by exactly `M` samples. Filtering is
//! a per-bin product; the last `M` samples of the inverse transform are the
//! valid linear-convolution output. The weight update normalizes each bin by
//! a running power estimate and projects the correction so that the last `M`
//! time-domain weight coefficients stay zero (the gradient constraint that
//! makes the block update a linear, not circular, correlation).

use rustfft::num_complex::Complex;

use crate::error::{dim, param, Result};
use crate::fft;

/// Division floor for the per-bin power estimate.
const POWER_FLOOR: f64 = 1e-8;

/// A block of `2M` complex bins: the transform of one overlapped input
/// window, or a frequency-domain weight/output vector.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralBlock {
    bins: Vec<Complex<f64>>,
}

impl SpectralBlock {
    pub fn zeros(len: usize) -> Self {
        Self {
            bins: vec![Complex::new(0.0, 0.0); len],
        }
    }

    /// Forward transform of a real time-domain sequence.
    pub fn from_time(samples: &[f64]) -> Self {
        Self {
            bins: fft::forward(samples),
        }
    }

    /// Scaled inverse transform, real part.
    pub fn to_time(&self) -> Vec<f64> {
        fft::inverse_real(&self.bins)
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bins(&self) -> &[Complex<f64>] {
        &self.bins
    }

    pub(crate) fn bins_mut(&mut self) -> &mut [Complex<f64>] {
        &mut self.bins
    }
}

/// How the per-bin power estimate is refreshed each block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerMode {
    /// `P(k) = gamma*P(k-1) + (1-gamma)*|X(k)|^2` (default).
    Recursive,
    /// `P(k) = gamma*p_init + (1-gamma)*|X(k)|^2`, kept for comparison: the
    /// forgetting factor then acts only on the constant initial power.
    Literal,
}

/// One block of input to a filter step.
#[derive(Clone, Debug)]
pub struct BlockIo {
    /// `2M` input samples: previous block then new block.
    pub x_window: Vec<f64>,
    /// `M` desired samples aligned with the new block.
    pub d_block: Vec<f64>,
}

impl BlockIo {
    pub fn new(x_window: Vec<f64>, d_block: Vec<f64>) -> Result<Self> {
        if d_block.is_empty() {
            return Err(param("d_block", "must be non-empty"));
        }
        if x_window.len() != 2 * d_block.len() {
            return Err(dim("x_window", 2 * d_block.len(), x_window.len()));
        }
        Ok(Self { x_window, d_block })
    }

    /// Builds the window for block index `block` out of full signals,
    /// zero-padding the pre-history of the first block.
    pub fn from_signals(x: &[f64], d: &[f64], m: usize, block: usize) -> Result<Self> {
        let start = block * m;
        let end = start + m;
        if end > x.len() || end > d.len() {
            return Err(dim("block range", end, x.len().min(d.len())));
        }
        let mut x_window = vec![0.0; 2 * m];
        for (i, slot) in x_window.iter_mut().enumerate() {
            let n = (start + i) as isize - m as isize;
            if n >= 0 {
                *slot = x[n as usize];
            }
        }
        let d_block = d[start..end].to_vec();
        Ok(Self { x_window, d_block })
    }
}

/// State of one overlap-save frequency-domain adaptive filter.
#[derive(Clone, Debug)]
pub struct FdafState {
    m: usize,
    pub(crate) weights: SpectralBlock,
    power: Vec<f64>,
    pub(crate) mu: f64,
    gamma: f64,
    p_init: f64,
    eps: f64,
    power_mode: PowerMode,
}

impl FdafState {
    /// Creates a zero-initialized filter of length `m` (a power of two, for
    /// radix-2 transform sizing) with every power bin set to `p_init`.
    pub fn new(m: usize, mu: f64, gamma: f64, p_init: f64) -> Result<Self> {
        if m == 0 || !m.is_power_of_two() {
            return Err(param("m", format!("must be a power of two, got {m}")));
        }
        if mu <= 0.0 || !mu.is_finite() {
            return Err(param("mu", format!("must be positive, got {mu}")));
        }
        // gamma == 1 is the "no power update" degenerate case used by the
        // block-LMS equivalence: P stays at p_init forever.
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(param("gamma", format!("must be in (0, 1], got {gamma}")));
        }
        if p_init <= 0.0 || !p_init.is_finite() {
            return Err(param("p_init", format!("must be positive, got {p_init}")));
        }
        Ok(Self {
            m,
            weights: SpectralBlock::zeros(2 * m),
            power: vec![p_init; 2 * m],
            mu,
            gamma,
            p_init,
            eps: POWER_FLOOR,
            power_mode: PowerMode::Recursive,
        })
    }

    pub fn with_power_mode(mut self, mode: PowerMode) -> Self {
        self.power_mode = mode;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn weights(&self) -> &SpectralBlock {
        &self.weights
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    fn check_io(&self, io: &BlockIo) -> Result<()> {
        if io.d_block.len() != self.m {
            return Err(dim("d_block", self.m, io.d_block.len()));
        }
        if io.x_window.len() != 2 * self.m {
            return Err(dim("x_window", 2 * self.m, io.x_window.len()));
        }
        Ok(())
    }

    /// Filters one block: `Y = X .* W`, output is the last `M` samples of
    /// the inverse transform of `Y`. State is unchanged.
    pub fn filter_block(&self, io: &BlockIo) -> Result<(Vec<f64>, SpectralBlock)> {
        self.check_io(io)?;
        let x = SpectralBlock::from_time(&io.x_window);
        Ok(self.filter_spectrum(&x))
    }

    /// Filtering with a precomputed input spectrum (shared between branches).
    pub(crate) fn filter_spectrum(&self, x: &SpectralBlock) -> (Vec<f64>, SpectralBlock) {
        let y_bins: Vec<Complex<f64>> = x
            .bins()
            .iter()
            .zip(self.weights.bins())
            .map(|(xb, wb)| xb * wb)
            .collect();
        let y = SpectralBlock { bins: y_bins };
        let y_time = y.to_time();
        (y_time[self.m..].to_vec(), y)
    }

    /// Updates the power estimate and the constrained weights from one block
    /// error. The error is padded as `[0_M, e]` before transforming, and the
    /// weight correction is projected so its last `M` time-domain samples
    /// are zero.
    pub fn adapt_block(&mut self, io: &BlockIo, e_block: &[f64]) -> Result<()> {
        self.check_io(io)?;
        if e_block.len() != self.m {
            return Err(dim("e_block", self.m, e_block.len()));
        }
        let x = SpectralBlock::from_time(&io.x_window);
        self.adapt_spectrum(&x, e_block);
        Ok(())
    }

    pub(crate) fn adapt_spectrum(&mut self, x: &SpectralBlock, e_block: &[f64]) {
        let two_m = 2 * self.m;

        for (p, xb) in self.power.iter_mut().zip(x.bins()) {
            let base = match self.power_mode {
                PowerMode::Recursive => *p,
                PowerMode::Literal => self.p_init,
            };
            *p = (self.gamma * base + (1.0 - self.gamma) * xb.norm_sqr()).max(self.eps);
        }

        let mut padded = vec![0.0; two_m];
        padded[self.m..].copy_from_slice(e_block);
        let e_bins = fft::forward(&padded);

        let grad: Vec<Complex<f64>> = (0..two_m)
            .map(|i| self.mu * x.bins()[i].conj() * e_bins[i] / self.power[i])
            .collect();

        // Gradient constraint: zero the circular-wrap half before going back
        // to the frequency domain.
        let mut grad_time = fft::inverse_real(&grad);
        for s in &mut grad_time[self.m..] {
            *s = 0.0;
        }
        let delta = fft::forward(&grad_time);
        for (w, d) in self.weights.bins_mut().iter_mut().zip(&delta) {
            *w += 2.0 * d;
        }
    }

    /// First `M` time-domain coefficients of the weight vector.
    pub fn time_weights(&self) -> Vec<f64> {
        let mut t = self.weights.to_time();
        t.truncate(self.m);
        t
    }
}

/// Per-branch block error `e = d - y`.
pub fn branch_error(d_block: &[f64], y_block: &[f64]) -> Result<Vec<f64>> {
    if d_block.len() != y_block.len() {
        return Err(dim("y_block", d_block.len(), y_block.len()));
    }
    Ok(d_block.iter().zip(y_block).map(|(d, y)| d - y).collect())
}
