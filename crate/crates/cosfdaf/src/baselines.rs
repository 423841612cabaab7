//! Time-domain comparison algorithms: LMS and the convex combination of two
//! LMS filters (CVSLMS).
//!
//! The combination reuses the exact mixing machinery of the block combiner —
//! sigmoid mixing parameter, the block `a` update collapsed to one sample,
//! and the same threshold rules — so the only difference from the
//! frequency-domain algorithm is the domain the branches adapt in.

use crate::combiner::{constraint_rules, sigmoid_lambda, update_a, CombinerParams};
use crate::error::{dim, param, Result};

/// A plain LMS filter.
#[derive(Clone, Debug)]
pub struct LmsState {
    pub(crate) w: Vec<f64>,
    pub(crate) mu: f64,
}

impl LmsState {
    pub fn new(m: usize, mu: f64) -> Result<Self> {
        if m == 0 {
            return Err(param("m", "filter length must be positive"));
        }
        if mu <= 0.0 || !mu.is_finite() {
            return Err(param("mu", format!("must be positive, got {mu}")));
        }
        Ok(Self {
            w: vec![0.0; m],
            mu,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// One sample: `y = w'x`, `e = d - y`, `w += mu*e*x`. The regressor is
    /// ordered newest first.
    pub fn step(&mut self, x_vec: &[f64], d: f64) -> Result<(f64, f64)> {
        if x_vec.len() != self.w.len() {
            return Err(dim("x_vec", self.w.len(), x_vec.len()));
        }
        let y: f64 = self.w.iter().zip(x_vec).map(|(w, x)| w * x).sum();
        let e = d - y;
        let mu_e = self.mu * e;
        for (w, x) in self.w.iter_mut().zip(x_vec) {
            *w += mu_e * x;
        }
        Ok((y, e))
    }
}

/// Outputs of one combined sample step.
#[derive(Clone, Copy, Debug)]
pub struct CvslmsStep {
    pub y: f64,
    pub e: f64,
    pub y1: f64,
    pub y2: f64,
    /// Mixing parameter used for this sample.
    pub lambda: f64,
}

/// Convex combination of two LMS filters with the shared mixing stage.
#[derive(Clone, Debug)]
pub struct CvslmsState {
    a: f64,
    lambda: f64,
    fast: LmsState,
    slow: LmsState,
    params: CombinerParams,
}

impl CvslmsState {
    pub fn new(fast: LmsState, slow: LmsState, params: CombinerParams) -> Result<Self> {
        params.validate()?;
        if fast.w.len() != slow.w.len() {
            return Err(dim("slow branch length", fast.w.len(), slow.w.len()));
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

    pub fn fast(&self) -> &LmsState {
        &self.fast
    }

    pub fn slow(&self) -> &LmsState {
        &self.slow
    }

    /// One sample of the combined filter: branch outputs and errors, the
    /// combined output through the current sigmoid mixing parameter, branch
    /// updates with their own errors, the single-sample `a` update, and the
    /// threshold rules.
    pub fn step(&mut self, x_vec: &[f64], d: f64) -> Result<CvslmsStep> {
        let lambda = sigmoid_lambda(self.a);
        let y1: f64 = self.fast.w.iter().zip(x_vec).map(|(w, x)| w * x).sum();
        let y2: f64 = self.slow.w.iter().zip(x_vec).map(|(w, x)| w * x).sum();
        let y = lambda * y1 + (1.0 - lambda) * y2;
        let e = d - y;

        self.fast.step(x_vec, d)?;
        self.slow.step(x_vec, d)?;

        self.a = update_a(
            self.a,
            &[e],
            &[y1],
            &[y2],
            lambda,
            self.params.mu_a,
            self.params.a_plus,
        );
        self.lambda = sigmoid_lambda(self.a);
        constraint_rules(
            &mut self.a,
            &mut self.lambda,
            &mut self.fast.mu,
            &mut self.slow.mu,
            &mut self.fast.w,
            &mut self.slow.w,
            &self.params,
        );

        Ok(CvslmsStep { y, e, y1, y2, lambda })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> CombinerParams {
        CombinerParams {
            mu_a: 1.0,
            beta: 0.99,
            r: 4.5,
            mu_max: 0.2,
            a_plus: 4.0,
        }
    }

    #[test]
    fn lms_step_hand_example() {
        let mut st = LmsState::new(2, 0.1).unwrap();
        st.w = vec![1.0, 0.0];
        let (y, e) = st.step(&[2.0, 3.0], 5.0).unwrap();
        assert_eq!(y, 2.0);
        assert_eq!(e, 3.0);
        assert!((st.weights()[0] - 1.6).abs() < 1e-15);
        assert!((st.weights()[1] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn lms_zero_weights_and_zero_input() {
        let mut st = LmsState::new(3, 0.1).unwrap();
        let (y, e) = st.step(&[1.0, 2.0, 3.0], 4.0).unwrap();
        assert_eq!(y, 0.0);
        assert_eq!(e, 4.0);

        let mut st = LmsState::new(3, 0.1).unwrap();
        st.w = vec![1.0, 1.0, 1.0];
        st.step(&[0.0, 0.0, 0.0], 4.0).unwrap();
        assert_eq!(st.weights(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn lms_dimension_mismatch() {
        let mut st = LmsState::new(3, 0.1).unwrap();
        assert!(st.step(&[1.0], 0.0).is_err());
    }

    #[test]
    fn cvslms_identical_branches_stay_symmetric() {
        let fast = LmsState::new(4, 0.01).unwrap();
        let slow = LmsState::new(4, 0.01).unwrap();
        let mut st = CvslmsState::new(fast, slow, params()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let d = rng.gen_range(-1.0..1.0);
            let out = st.step(&x, d).unwrap();
            assert_eq!(out.y1, out.y2);
            assert_eq!(out.y, out.y1);
        }
        assert_eq!(st.a(), 0.0);
        assert_eq!(st.lambda(), 0.5);
    }

    #[test]
    fn cvslms_matches_shared_hand_example() {
        // M = 1: w1 = [0], w2 = [1], x = [2] gives y1 = 0, y2 = 2; d = 2
        // makes the combined error 1. Same arithmetic as the block update.
        let fast = LmsState::new(1, 1e-9).unwrap();
        let mut slow = LmsState::new(1, 1e-9).unwrap();
        slow.w = vec![1.0];
        let mut st = CvslmsState::new(fast, slow, params()).unwrap();
        let out = st.step(&[2.0], 2.0).unwrap();
        assert_eq!(out.y1, 0.0);
        assert_eq!(out.y2, 2.0);
        assert_eq!(out.e, 1.0);
        assert!((st.a() - (-0.5)).abs() < 1e-9);
    }

    #[test]
    fn cvslms_combined_output_is_convex_every_sample() {
        let fast = LmsState::new(8, 0.05).unwrap();
        let slow = LmsState::new(8, 0.005).unwrap();
        let mut st = CvslmsState::new(fast, slow, params()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let x: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let d = rng.gen_range(-1.0..1.0);
            let out = st.step(&x, d).unwrap();
            assert!(out.y >= out.y1.min(out.y2) - 1e-12);
            assert!(out.y <= out.y1.max(out.y2) + 1e-12);
        }
    }

    #[test]
    fn cvslms_steady_state_tracks_better_component() {
        // System identification at a stable step-size pair: the combination's
        // steady-state squared error should not exceed the better branch's
        // by more than 1 dB.
        let m = 16;
        let trials = 20;
        let samples = 6000;
        let tail = 1000;
        let mut comb_err = 0.0;
        let mut fast_err = 0.0;
        let mut slow_err = 0.0;
        for t in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + t as u64);
            let mut taps: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = taps.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in &mut taps {
                *v /= norm;
            }
            let x: Vec<f64> = (0..samples).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut fast = LmsState::new(m, 0.05).unwrap();
            let mut slow = LmsState::new(m, 0.005).unwrap();
            let mut comb = CvslmsState::new(
                LmsState::new(m, 0.05).unwrap(),
                LmsState::new(m, 0.005).unwrap(),
                CombinerParams {
                    mu_a: 100.0,
                    ..params()
                },
            )
            .unwrap();
            let mut x_vec = vec![0.0; m];
            for n in 0..samples {
                for k in 0..m {
                    x_vec[k] = if n >= k { x[n - k] } else { 0.0 };
                }
                let clean: f64 = taps.iter().zip(&x_vec).map(|(t, x)| t * x).sum();
                let noise = 0.1 * rng.gen_range(-1.0..1.0);
                let d = clean + noise;
                let (_, ef) = fast.step(&x_vec, d).unwrap();
                let (_, es) = slow.step(&x_vec, d).unwrap();
                let out = comb.step(&x_vec, d).unwrap();
                if n >= samples - tail {
                    fast_err += ef * ef;
                    slow_err += es * es;
                    comb_err += out.e * out.e;
                }
            }
        }
        let db = |v: f64| 10.0 * (v / (trials * tail) as f64).log10();
        let best = db(fast_err).min(db(slow_err));
        assert!(
            db(comb_err) <= best + 1.0,
            "combined {:.2} dB vs best component {:.2} dB",
            db(comb_err),
            best
        );
    }
}
