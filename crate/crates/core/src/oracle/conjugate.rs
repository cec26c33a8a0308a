//! Two-model Beta-Binomial comparison with a closed-form posterior.
//!
//! `M1`: `y ~ Bin(n, p0)` with `p0` fixed (no parameters).
//! `M2`: `y ~ Bin(n, p)`, `p ~ Beta(a, b)` (one parameter).

use rand::Rng;
use rand_distr::{Beta, Distribution};
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::proposal::{JumpProposal, ProposalKernel, Trial};
use crate::state::{ChainState, ModelIndex};
use crate::target::{ModelSpace, TargetDensity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBinomial {
    pub successes: u64,
    pub trials: u64,
    pub p0: f64,
    pub a: f64,
    pub b: f64,
    pub prior_m1: f64,
}

impl BetaBinomial {
    pub fn new(successes: u64, trials: u64, p0: f64, a: f64, b: f64) -> Result<Self> {
        if successes > trials {
            return Err(Error::Invalid("successes exceed trials".into()));
        }
        if !(p0 > 0.0 && p0 < 1.0) || !(a > 0.0) || !(b > 0.0) {
            return Err(Error::Invalid("p0 must lie in (0,1) and a, b must be positive".into()));
        }
        Ok(Self {
            successes,
            trials,
            p0,
            a,
            b,
            prior_m1: 0.5,
        })
    }

    fn failures(&self) -> f64 {
        (self.trials - self.successes) as f64
    }

    /// Log marginal likelihoods `(log m1, log m2)` without the shared
    /// binomial coefficient.
    pub fn log_marginals(&self) -> (f64, f64) {
        let y = self.successes as f64;
        let f = self.failures();
        let m1 = y * self.p0.ln() + f * (1.0 - self.p0).ln();
        let m2 = ln_beta(y + self.a, f + self.b) - ln_beta(self.a, self.b);
        (m1, m2)
    }

    /// Exact `(P(M1|y), P(M2|y))`.
    pub fn exact_model_posterior(&self) -> [f64; 2] {
        let (m1, m2) = self.log_marginals();
        let l1 = m1 + self.prior_m1.ln();
        let l2 = m2 + (1.0 - self.prior_m1).ln();
        let mx = l1.max(l2);
        let (e1, e2) = ((l1 - mx).exp(), (l2 - mx).exp());
        [e1 / (e1 + e2), e2 / (e1 + e2)]
    }
}

/// Exact posterior model probabilities of a Beta-Binomial comparison.
pub fn exact_model_posterior(case: &BetaBinomial) -> [f64; 2] {
    case.exact_model_posterior()
}

impl ModelSpace for BetaBinomial {
    fn n_models(&self) -> usize {
        2
    }
    fn dim(&self, m: ModelIndex) -> usize {
        m.0
    }
}

impl TargetDensity<ChainState> for BetaBinomial {
    fn log_target(&self, s: &ChainState) -> f64 {
        self.check(s).expect("state matches the Beta-Binomial model space");
        let y = self.successes as f64;
        let f = self.failures();
        match s.model.0 {
            0 => self.prior_m1.ln() + y * self.p0.ln() + f * (1.0 - self.p0).ln(),
            _ => {
                let p = s.params[0];
                if !(p > 0.0 && p < 1.0) {
                    return f64::NEG_INFINITY;
                }
                (1.0 - self.prior_m1).ln()
                    + y * p.ln()
                    + f * (1.0 - p).ln()
                    + (self.a - 1.0) * p.ln()
                    + (self.b - 1.0) * (1.0 - p).ln()
                    - ln_beta(self.a, self.b)
            }
        }
    }
}

fn beta_log_pdf(x: f64, a: f64, b: f64) -> f64 {
    if !(x > 0.0 && x < 1.0) {
        return f64::NEG_INFINITY;
    }
    (a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_beta(a, b)
}

/// Between-model jump: `M1 → M2` draws `p ~ Beta(qa, qb)`; `M2 → M1` drops
/// `p`. The map is the identity on `(u) ↔ (p)`, so `|J| = 1`.
#[derive(Debug, Clone, Copy)]
pub struct BetaJump {
    pub qa: f64,
    pub qb: f64,
}

impl JumpProposal<ChainState> for BetaJump {
    type Move = ();
    type Route = ModelIndex;

    fn choose_move<R: Rng + ?Sized>(&self, _: &mut R, _: &ChainState) -> Option<()> {
        Some(())
    }
    fn reverse_move(&self, _: &ChainState, _: &()) {}
    fn choose_route<R: Rng + ?Sized>(&self, _: &mut R, x: &ChainState, _: &()) -> Option<ModelIndex> {
        Some(ModelIndex(1 - x.model.0))
    }
    fn reverse_route(&self, x: &ChainState, _: &ChainState, _: &(), _: &ModelIndex) -> ModelIndex {
        x.model
    }
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, x: &ChainState, _: &(), to: &ModelIndex) -> Trial<ChainState> {
        let beta = Beta::new(self.qa, self.qb).expect("valid Beta proposal");
        if to.0 == 1 {
            let p: f64 = beta.sample(rng);
            let lg = beta_log_pdf(p, self.qa, self.qb);
            Trial::new(ChainState::new(ModelIndex(1), vec![p]), lg, 0.0, 0.0)
        } else {
            let lg = beta_log_pdf(x.params[0], self.qa, self.qb);
            Trial::new(ChainState::new(ModelIndex(0), vec![]), 0.0, lg, 0.0)
        }
    }
    fn label(&self, _: &()) -> &'static str {
        "jump"
    }
}

/// Independence proposal `p ~ Beta(qa, qb)` inside `M2`.
#[derive(Debug, Clone, Copy)]
pub struct BetaIndependence {
    pub qa: f64,
    pub qb: f64,
}

impl ProposalKernel for BetaIndependence {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, _: &ChainState) -> (Vec<f64>, f64) {
        let p: f64 = Beta::new(self.qa, self.qb).expect("valid Beta proposal").sample(rng);
        (vec![p], beta_log_pdf(p, self.qa, self.qb))
    }
    fn log_density(&self, _: &ChainState, to: &ChainState) -> f64 {
        beta_log_pdf(to.params[0], self.qa, self.qb)
    }
}
