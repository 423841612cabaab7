//! Convex combination of two overlap-save frequency-domain branches.
//!
//! A fast branch (large step) and a slow branch (small step) run on the same
//! input blocks, each adapting with its own error. The combined output is
//! `y = lambda*y1 + (1-lambda)*y2` where the mixing parameter
//! `lambda = 1/(1+exp(-a))` is steered by gradient descent of the block
//! quadratic error with respect to the auxiliary variable `a`. Threshold
//! rules then rescale both step sizes and transfer the dominant branch's
//! weights whenever `lambda` saturates against its limits.

use crate::error::{param, Result};
use crate::fdaf::{branch_error, BlockIo, FdafState, SpectralBlock};

/// Mixing-stage parameters shared by the frequency- and time-domain
/// combinations.
#[derive(Clone, Copy, Debug)]
pub struct CombinerParams {
    /// Step size for the auxiliary variable `a`.
    pub mu_a: f64,
    /// Saturation threshold close to 1.
    pub beta: f64,
    /// Step-size scaling factor applied by the threshold rules.
    pub r: f64,
    /// Upper bound for the fast step size under rescaling.
    pub mu_max: f64,
    /// Clamp endpoint for `a`; keeps `lambda*(1-lambda)` from vanishing.
    pub a_plus: f64,
}

impl CombinerParams {
    pub fn validate(&self) -> Result<()> {
        if self.mu_a <= 0.0 || !self.mu_a.is_finite() {
            return Err(param("mu_a", format!("must be positive, got {}", self.mu_a)));
        }
        if !(self.beta > 0.5 && self.beta < 1.0) {
            return Err(param("beta", format!("must be in (0.5, 1), got {}", self.beta)));
        }
        if self.r <= 1.0 || !self.r.is_finite() {
            return Err(param("r", format!("must exceed 1, got {}", self.r)));
        }
        if self.mu_max <= 0.0 || !self.mu_max.is_finite() {
            return Err(param("mu_max", format!("must be positive, got {}", self.mu_max)));
        }
        if self.a_plus <= 0.0 || !self.a_plus.is_finite() {
            return Err(param("a_plus", format!("must be positive, got {}", self.a_plus)));
        }
        Ok(())
    }
}

/// Sigmoid mapping from the auxiliary variable to the mixing parameter.
pub fn sigmoid_lambda(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let ea = a.exp();
        ea / (1.0 + ea)
    }
}

/// `lambda*y1 + (1-lambda)*y2`, elementwise.
pub fn combine_outputs(y1: &[f64], y2: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(param("lambda", format!("must be in [0, 1], got {lambda}")));
    }
    if y1.len() != y2.len() {
        return Err(crate::error::dim("y2", y1.len(), y2.len()));
    }
    Ok(y1
        .iter()
        .zip(y2)
        .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
        .collect())
}

/// Per-bin convex combination of two weight blocks.
pub fn combine_weights(w1: &SpectralBlock, w2: &SpectralBlock, lambda: f64) -> Result<SpectralBlock> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(param("lambda", format!("must be in [0, 1], got {lambda}")));
    }
    if w1.len() != w2.len() {
        return Err(crate::error::dim("w2", w1.len(), w2.len()));
    }
    let mut out = SpectralBlock::zeros(w1.len());
    for ((o, a), b) in out.bins_mut().iter_mut().zip(w1.bins()).zip(w2.bins()) {
        *o = lambda * a + (1.0 - lambda) * b;
    }
    Ok(out)
}

/// Gradient-descent update of the auxiliary variable over one block,
/// clamped to `[-a_plus, a_plus]`:
///
/// `a' = a - (mu_a/M) * sum_m e(m)*(y2(m)-y1(m)) * lambda*(1-lambda)`
pub fn update_a(
    a: f64,
    e_block: &[f64],
    y1: &[f64],
    y2: &[f64],
    lambda: f64,
    mu_a: f64,
    a_plus: f64,
) -> f64 {
    assert_eq!(e_block.len(), y1.len());
    assert_eq!(e_block.len(), y2.len());
    let m = e_block.len() as f64;
    let sum: f64 = e_block
        .iter()
        .zip(y1)
        .zip(y2)
        .map(|((e, a1), a2)| e * (a2 - a1))
        .sum();
    let next = a - (mu_a / m) * sum * lambda * (1.0 - lambda);
    next.clamp(-a_plus, a_plus)
}

/// The threshold rules applied once per step, after the `a` update. Exactly
/// one of four outcomes fires, keyed on the freshly updated `lambda`:
///
/// 1. `lambda < 1-beta`: both steps divided by `r`, the dominant (slow)
///    branch's weights overwrite the fast branch, `a = 0`, `lambda = 0.5`.
/// 2. `lambda > beta` and `r*mu1 < mu_max`: both steps multiplied by `r`,
///    the dominant (fast) branch's weights overwrite the slow branch,
///    `a = 0`, `lambda = 0.5`.
/// 3. `lambda > beta` and `r*mu1 >= mu_max`: `a = a_plus`, `lambda = beta`
///    (the one state where `lambda` is pinned rather than derived from `a`;
///    the pin lasts until the next sigmoid evaluation).
/// 4. otherwise: unchanged.
pub(crate) fn constraint_rules<W: Clone>(
    a: &mut f64,
    lambda: &mut f64,
    mu1: &mut f64,
    mu2: &mut f64,
    w1: &mut W,
    w2: &mut W,
    p: &CombinerParams,
) {
    if *lambda < 1.0 - p.beta {
        *mu1 /= p.r;
        *mu2 /= p.r;
        w1.clone_from(w2);
        *a = 0.0;
        *lambda = 0.5;
    } else if *lambda > p.beta {
        if p.r * *mu1 < p.mu_max {
            *mu1 *= p.r;
            *mu2 *= p.r;
            w2.clone_from(w1);
            *a = 0.0;
            *lambda = 0.5;
        } else {
            *a = p.a_plus;
            *lambda = p.beta;
        }
    }
}

/// Outputs of one combined block step.
#[derive(Clone, Debug)]
pub struct BlockStep {
    /// Combined output for the block.
    pub y: Vec<f64>,
    /// Combined error `d - y`.
    pub e: Vec<f64>,
    /// Fast-branch output.
    pub y1: Vec<f64>,
    /// Slow-branch output.
    pub y2: Vec<f64>,
    /// Mixing parameter used for this block.
    pub lambda: f64,
    /// Convex combination of the branch weights that produced this block's
    /// outputs, for deviation reporting.
    pub combined_weights: SpectralBlock,
}

/// State of the combined filter: two branches plus the mixing stage.
#[derive(Clone, Debug)]
pub struct CombinerState {
    a: f64,
    lambda: f64,
    fast: FdafState,
    slow: FdafState,
    params: CombinerParams,
}

impl CombinerState {
    /// Starts at `a = 0`, `lambda = 0.5`.
    pub fn new(fast: FdafState, slow: FdafState, params: CombinerParams) -> Result<Self> {
        params.validate()?;
        if fast.m() != slow.m() {
            return Err(crate::error::dim("slow branch length", fast.m(), slow.m()));
        }
        Ok(Self {
            a: 0.0,
            lambda: 0.5,
            fast,
            slow,
            params,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn fast(&self) -> &FdafState {
        &self.fast
    }

    pub fn slow(&self) -> &FdafState {
        &self.slow
    }

    pub fn params(&self) -> &CombinerParams {
        &self.params
    }

    pub fn m(&self) -> usize {
        self.fast.m()
    }

    /// Applies the threshold rules to the current state.
    pub fn apply_constraints(&mut self) {
        constraint_rules(
            &mut self.a,
            &mut self.lambda,
            &mut self.fast.mu,
            &mut self.slow.mu,
            &mut self.fast.weights,
            &mut self.slow.weights,
            &self.params,
        );
        debug_assert!(self.lambda >= 1.0 - self.params.beta && self.lambda <= self.params.beta);
    }

    /// Runs one block through both branches and the mixing stage:
    /// per-branch filtering and errors, `lambda` from the sigmoid of `a`,
    /// combined output and weights, branch adaptation, the `a` update, and
    /// the threshold rules last.
    pub fn block_step(&mut self, io: &BlockIo) -> Result<BlockStep> {
        let x = SpectralBlock::from_time(&io.x_window);
        let (y1, _) = self.fast.filter_spectrum(&x);
        let (y2, _) = self.slow.filter_spectrum(&x);
        if y1.len() != io.d_block.len() {
            return Err(crate::error::dim("d_block", y1.len(), io.d_block.len()));
        }
        let e1 = branch_error(&io.d_block, &y1)?;
        let e2 = branch_error(&io.d_block, &y2)?;

        let lambda = sigmoid_lambda(self.a);
        let y = combine_outputs(&y1, &y2, lambda)?;
        let e = branch_error(&io.d_block, &y)?;
        // Combined weights are taken before adaptation: the combination pairs
        // this block's lambda with the weights that produced y1 and y2.
        let combined_weights = combine_weights(self.fast.weights(), self.slow.weights(), lambda)?;

        self.fast.adapt_spectrum(&x, &e1);
        self.slow.adapt_spectrum(&x, &e2);

        self.a = update_a(
            self.a,
            &e,
            &y1,
            &y2,
            lambda,
            self.params.mu_a,
            self.params.a_plus,
        );
        self.lambda = sigmoid_lambda(self.a);
        self.apply_constraints();

        Ok(BlockStep {
            y,
            e,
            y1,
            y2,
            lambda,
            combined_weights,
        })
    }
}
