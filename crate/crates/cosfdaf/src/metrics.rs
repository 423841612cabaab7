//! EMSE/MSD evaluation, Monte-Carlo aggregation, and the multiplication-count
//! complexity model.

use serde::Serialize;

use crate::error::{dim, param, Result};

/// One trial-averaged trajectory in dB, indexed by block (or sample).
#[derive(Clone, Debug)]
pub struct MetricSeries {
    pub name: String,
    pub values_db: Vec<f64>,
    pub trials: usize,
}

/// Squared a-priori excess error for one sample: `((w_o - w_hat)' x)^2`.
///
/// The regressor is ordered newest first. Averaging over blocks/trials and
/// the dB conversion happen in [`aggregate`].
pub fn emse_at(w_o: &[f64], w_hat: &[f64], x_vec: &[f64]) -> Result<f64> {
    if w_hat.len() != w_o.len() {
        return Err(dim("w_hat", w_o.len(), w_hat.len()));
    }
    if x_vec.len() != w_o.len() {
        return Err(dim("x_vec", w_o.len(), x_vec.len()));
    }
    let excess: f64 = w_o
        .iter()
        .zip(w_hat)
        .zip(x_vec)
        .map(|((o, h), x)| (o - h) * x)
        .sum();
    Ok(excess * excess)
}

/// Squared Euclidean distance between the plant and the estimate.
pub fn msd_at(w_o: &[f64], w_hat: &[f64]) -> Result<f64> {
    if w_hat.len() != w_o.len() {
        return Err(dim("w_hat", w_o.len(), w_hat.len()));
    }
    Ok(w_o
        .iter()
        .zip(w_hat)
        .map(|(o, h)| (o - h) * (o - h))
        .sum())
}

/// Elementwise mean across trials, then `10*log10`. Zero means map to the
/// `-inf` sentinel (emitted files clamp it to -400 dB).
pub fn aggregate(name: &str, trials: &[Vec<f64>]) -> Result<MetricSeries> {
    if trials.is_empty() {
        return Err(param("trials", "must contain at least one trial"));
    }
    let len = trials[0].len();
    for t in trials {
        if t.len() != len {
            return Err(dim("trial length", len, t.len()));
        }
    }
    let n = trials.len() as f64;
    let values_db = (0..len)
        .map(|i| {
            let mean = trials.iter().map(|t| t[i]).sum::<f64>() / n;
            10.0 * mean.log10()
        })
        .collect();
    Ok(MetricSeries {
        name: name.to_string(),
        values_db,
        trials: trials.len(),
    })
}

/// Algorithms covered by the multiplication-count model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplexityAlgorithm {
    Cvslms,
    Cosfdaf,
}

#[derive(Clone, Copy, Debug)]
pub struct ComplexityModel {
    pub algorithm: ComplexityAlgorithm,
    pub m: usize,
}

/// Real multiplications per `M` output samples:
/// `4M^2 + 6M + 4` for CVSLMS, `20M*log2(2M) + 35M + 1` for COSFDAF.
pub fn multiplications(model: &ComplexityModel) -> Result<u64> {
    let m = model.m as u64;
    if model.m == 0 {
        return Err(param("m", "must be positive"));
    }
    match model.algorithm {
        ComplexityAlgorithm::Cvslms => Ok(4 * m * m + 6 * m + 4),
        ComplexityAlgorithm::Cosfdaf => {
            if !model.m.is_power_of_two() {
                return Err(param("m", format!("must be a power of two, got {m}")));
            }
            let log2_2m = (2 * m).trailing_zeros() as u64;
            Ok(20 * m * log2_2m + 35 * m + 1)
        }
    }
}
