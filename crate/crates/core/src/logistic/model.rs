//! Five nested logistic regression models on a 2×2 binomial table.
//!
//! `logit p_ij = μ + μ_i^A + μ_j^B + μ_ij^AB`, with the models
//! `{1}`, `{1,A}`, `{1,B}`, `{1,A,B}`, `{1,A,B,AB}`.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use super::data::BinomialTable;
use crate::error::{Error, Result};
use crate::proposal::JumpMatrix;
use crate::quad::LocalExpansion;
use crate::state::{ChainState, ModelIndex};
use crate::target::{sentinel, ModelSpace, SmoothTarget, TargetDensity};

/// Columns of the full design: intercept, A, B, A·B.
pub const N_COLUMNS: usize = 4;

/// Design columns of each model.
pub const MODEL_COLUMNS: [&[usize]; 5] = [&[0], &[0, 1], &[0, 2], &[0, 1, 2], &[0, 1, 2, 3]];

pub const N_MODELS: usize = 5;

/// Factor coding of the two-level factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coding {
    /// Level 1 → +1, level 2 → −1.
    #[default]
    SumToZero,
    /// Level 1 → 0, level 2 → 1.
    Corner,
}

impl FromStr for Coding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum-to-zero" | "sum" => Ok(Self::SumToZero),
            "corner" => Ok(Self::Corner),
            _ => Err(Error::Invalid(format!("unknown coding `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LogisticModel {
    pub data: BinomialTable,
    pub coding: Coding,
    /// Prior variance of every coefficient.
    pub prior_var: f64,
    /// Full design row of each cell.
    design: [[f64; N_COLUMNS]; 4],
    jumps: JumpMatrix,
}

fn level(coding: Coding, l: u8) -> f64 {
    match (coding, l) {
        (Coding::SumToZero, 1) => 1.0,
        (Coding::SumToZero, _) => -1.0,
        (Coding::Corner, 1) => 0.0,
        (Coding::Corner, _) => 1.0,
    }
}

/// `log(1 + e^x)` without overflow.
fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl LogisticModel {
    pub fn new(data: BinomialTable, coding: Coding, prior_var: f64) -> Result<Self> {
        if !(prior_var > 0.0) {
            return Err(Error::Invalid("prior variance must be positive".into()));
        }
        let mut design = [[0.0; N_COLUMNS]; 4];
        for (row, c) in design.iter_mut().zip(&data.cells) {
            let a = level(coding, c.condition);
            let b = level(coding, c.treatment);
            *row = [1.0, a, b, a * b];
        }
        let jumps = JumpMatrix::uniform(&[vec![1, 2], vec![0, 3], vec![0, 3], vec![1, 2, 4], vec![3]])?;
        Ok(Self {
            data,
            coding,
            prior_var,
            design,
            jumps,
        })
    }

    /// The bundled table, sum-to-zero coding and `N(0, 8)` priors.
    pub fn bundled() -> Self {
        Self::new(BinomialTable::bundled(), Coding::SumToZero, 8.0).expect("valid defaults")
    }

    /// Adjacency: models whose column sets differ by one column.
    pub fn jumps(&self) -> &JumpMatrix {
        &self.jumps
    }

    pub fn columns(&self, m: ModelIndex) -> &'static [usize] {
        MODEL_COLUMNS[m.0]
    }

    fn linear_predictors(&self, m: ModelIndex, beta: &[f64]) -> [f64; 4] {
        let cols = self.columns(m);
        let mut eta = [0.0; 4];
        for (e, row) in eta.iter_mut().zip(&self.design) {
            *e = cols.iter().zip(beta).map(|(&c, b)| row[c] * b).sum();
        }
        eta
    }

    /// Binomial log likelihood without the binomial coefficients.
    pub fn log_likelihood(&self, m: ModelIndex, beta: &[f64]) -> f64 {
        let eta = self.linear_predictors(m, beta);
        self.data
            .cells
            .iter()
            .zip(eta)
            .map(|(c, e)| c.survivals as f64 * e - c.total as f64 * log1p_exp(e))
            .sum()
    }

    pub fn log_prior(&self, beta: &[f64]) -> f64 {
        let v = self.prior_var;
        let norm = -0.5 * (2.0 * PI * v).ln();
        beta.iter().map(|b| norm - b * b / (2.0 * v)).sum::<f64>() + (1.0 / N_MODELS as f64).ln()
    }

    /// `log f(y|m,β) + log p(β|m) + log p(m)`.
    pub fn log_posterior(&self, m: ModelIndex, beta: &[f64]) -> Result<f64> {
        if m.0 >= N_MODELS {
            return Err(Error::Invalid(format!("model {} outside 1..=5", m.number())));
        }
        let d = self.columns(m).len();
        if beta.len() != d {
            return Err(Error::Dimension {
                expected: d,
                actual: beta.len(),
            });
        }
        Ok(sentinel(self.log_likelihood(m, beta) + self.log_prior(beta)))
    }

    /// Score `Xᵀ(y − np) − β/v` and curvature `−XᵀWX − I/v`.
    pub fn score_and_curvature(&self, m: ModelIndex, beta: &[f64]) -> Result<LocalExpansion> {
        let cols = self.columns(m);
        let d = cols.len();
        if beta.len() != d {
            return Err(Error::Dimension {
                expected: d,
                actual: beta.len(),
            });
        }
        let eta = self.linear_predictors(m, beta);
        let mut s = DVector::from_iterator(d, beta.iter().map(|b| -b / self.prior_var));
        let mut h = DMatrix::from_diagonal_element(d, d, -1.0 / self.prior_var);
        for ((c, row), e) in self.data.cells.iter().zip(&self.design).zip(eta) {
            let p = logistic(e);
            let resid = c.survivals as f64 - c.total as f64 * p;
            let w = c.total as f64 * p * (1.0 - p);
            for (a, &ca) in cols.iter().enumerate() {
                s[a] += row[ca] * resid;
                for (b, &cb) in cols.iter().enumerate() {
                    h[(a, b)] -= w * row[ca] * row[cb];
                }
            }
        }
        LocalExpansion::new(beta.to_vec(), s, h)
    }

    /// Coefficients of `from` re-expressed in model `to`: shared columns
    /// carried over, missing columns set to zero.
    pub fn pad(&self, beta: &[f64], from: ModelIndex, to: ModelIndex) -> Vec<f64> {
        let src = self.columns(from);
        self.columns(to)
            .iter()
            .map(|c| src.iter().position(|s| s == c).map_or(0.0, |i| beta[i]))
            .collect()
    }

    /// Posterior mode by Newton's method, from `β = 0`.
    pub fn mode(&self, m: ModelIndex) -> Vec<f64> {
        let d = self.columns(m).len();
        let mut beta = vec![0.0; d];
        for _ in 0..50 {
            let e = self.score_and_curvature(m, &beta).expect("dimension matches");
            let step = (-e.curvature)
                .cholesky()
                .expect("curvature is negative definite")
                .solve(&e.score);
            for (b, s) in beta.iter_mut().zip(step.iter()) {
                *b += s;
            }
            if step.amax() < 1e-12 {
                break;
            }
        }
        beta
    }
}

impl ModelSpace for LogisticModel {
    fn n_models(&self) -> usize {
        N_MODELS
    }
    fn dim(&self, m: ModelIndex) -> usize {
        self.columns(m).len()
    }
}

impl TargetDensity<ChainState> for LogisticModel {
    fn log_target(&self, s: &ChainState) -> f64 {
        self.log_posterior(s.model, &s.params)
            .expect("state matches the logistic model space")
    }
}

impl SmoothTarget for LogisticModel {
    fn expansion(&self, s: &ChainState) -> LocalExpansion {
        self.score_and_curvature(s.model, &s.params)
            .expect("state matches the logistic model space")
    }

    fn embed(&self, anchor: &ChainState, model: ModelIndex) -> ChainState {
        ChainState::new(model, self.pad(&anchor.params, anchor.model, model))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_zero_full_model_by_hand() {
        let m = LogisticModel::bundled();
        let lp = m.log_posterior(ModelIndex(4), &[0.0; 4]).unwrap();
        let lik = -79.0 * 2f64.ln();
        let prior = 4.0 * (-0.5 * (2.0 * PI * 8.0).ln());
        assert!((lp - (lik + prior + (0.2f64).ln())).abs() < 1e-12);
    }

    #[test]
    fn weights_at_zero_are_quarter_n() {
        let m = LogisticModel::bundled();
        let e = m.score_and_curvature(ModelIndex(0), &[0.0]).unwrap();
        assert!((e.curvature[(0, 0)] - (-(79.0 / 4.0) - 1.0 / 8.0)).abs() < 1e-12);
    }

    #[test]
    fn mode_beats_origin() {
        let m = LogisticModel::bundled();
        let mode = m.mode(ModelIndex(1));
        let at_mode = m.log_posterior(ModelIndex(1), &mode).unwrap();
        let at_zero = m.log_posterior(ModelIndex(1), &[0.0, 0.0]).unwrap();
        assert!(at_mode > at_zero);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let m = LogisticModel::bundled();
        assert!(matches!(
            m.log_posterior(ModelIndex(1), &[0.0]),
            Err(Error::Dimension { expected: 2, actual: 1 })
        ));
    }

    #[test]
    fn pad_carries_shared_columns() {
        let m = LogisticModel::bundled();
        assert_eq!(m.pad(&[1.0, 2.0], ModelIndex(2), ModelIndex(3)), vec![1.0, 0.0, 2.0]);
        assert_eq!(m.pad(&[1.0, 2.0, 3.0], ModelIndex(3), ModelIndex(1)), vec![1.0, 2.0]);
    }

    #[test]
    fn adjacency_is_dimension_plus_minus_one() {
        let m = LogisticModel::bundled();
        for a in 0..N_MODELS {
            for (b, _) in m.jumps().neighbours(ModelIndex(a)) {
                let (da, db) = (m.dim(ModelIndex(a)) as i64, m.dim(b) as i64);
                assert_eq!((da - db).abs(), 1);
            }
        }
    }
}
