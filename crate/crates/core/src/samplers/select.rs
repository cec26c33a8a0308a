use rand::Rng;

use crate::error::{Error, Result};

/// `log Σ exp(x_i)`, `−∞` for an empty or all-`−∞` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Log selection probabilities `lw_j − logsumexp(lw)`.
pub fn selection_log_probs(log_weights: &[f64]) -> Result<Vec<f64>> {
    let lse = log_sum_exp(log_weights);
    if !lse.is_finite() {
        return Err(Error::NoValidTrial);
    }
    Ok(log_weights.iter().map(|&w| w - lse).collect())
}

/// Draws an index with probability proportional to `exp(log_weights[j])`
/// by inverting the cumulative sum with a single uniform.
pub fn select_trial<R: Rng + ?Sized>(rng: &mut R, log_weights: &[f64]) -> Result<usize> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NoValidTrial);
    }
    let u: f64 = rng.random();
    if log_weights.len() == 1 {
        return Ok(0);
    }
    let scaled: Vec<f64> = log_weights.iter().map(|&w| (w - max).exp()).collect();
    let total: f64 = scaled.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (j, &s) in scaled.iter().enumerate() {
        if s > 0.0 {
            acc += s;
            last = j;
            if target < acc {
                return Ok(j);
            }
        }
    }
    Ok(last)
}
