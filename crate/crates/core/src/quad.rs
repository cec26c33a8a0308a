//! Second-order expansion of `log π` and the GMTRJ-quad weights.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Score `s` and curvature `D` of `log π` at an anchor point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalExpansion {
    pub anchor: Vec<f64>,
    pub score: DVector<f64>,
    pub curvature: DMatrix<f64>,
}

impl LocalExpansion {
    pub fn new(anchor: Vec<f64>, score: DVector<f64>, curvature: DMatrix<f64>) -> Result<Self> {
        let d = anchor.len();
        if score.len() != d {
            return Err(Error::Dimension {
                expected: d,
                actual: score.len(),
            });
        }
        if curvature.nrows() != d || curvature.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                actual: curvature.nrows().max(curvature.ncols()),
            });
        }
        let asym = (&curvature - curvature.transpose()).amax();
        if asym > 1e-10 {
            return Err(Error::Invalid(format!(
                "curvature is not symmetric (max asymmetry {asym:e})"
            )));
        }
        Ok(Self {
            anchor,
            score,
            curvature,
        })
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    /// `log A = sᵀΔ + ½ΔᵀDΔ` with `Δ = candidate − anchor`.
    pub fn log_a(&self, candidate: &[f64]) -> Result<f64> {
        if candidate.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: candidate.len(),
            });
        }
        Ok(self.log_a_unchecked(candidate))
    }

    pub(crate) fn log_a_unchecked(&self, candidate: &[f64]) -> f64 {
        let d = self.dim();
        let mut delta = [0.0f64; 8];
        let mut heap;
        let delta: &mut [f64] = if d <= 8 {
            &mut delta[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        for (i, di) in delta.iter_mut().enumerate() {
            *di = candidate[i] - self.anchor[i];
        }
        let mut linear = 0.0;
        let mut quadratic = 0.0;
        for i in 0..d {
            linear += self.score[i] * delta[i];
            let mut row = 0.0;
            for j in 0..d {
                row += self.curvature[(i, j)] * delta[j];
            }
            quadratic += delta[i] * row;
        }
        linear + 0.5 * quadratic
    }
}

/// `log A(candidate, anchor)`.
pub fn log_a(expansion: &LocalExpansion, candidate: &[f64]) -> Result<f64> {
    expansion.log_a(candidate)
}

/// Log GMTRJ-quad weight `log A − log T(anchor, candidate)`. The common
/// factor `π(anchor)` is dropped; it cancels in the selection probabilities.
pub fn quad_weight(expansion: &LocalExpansion, candidate: &[f64], log_t_fwd: f64) -> Result<f64> {
    Ok(expansion.log_a(candidate)? - log_t_fwd)
}
