//! Exact verification of the kernels on enumerable spaces.

mod chain;
mod conjugate;
mod enumerate;
mod toy;

pub use chain::{run_toy, toy_step};
pub use conjugate::{exact_model_posterior, BetaBinomial, BetaIndependence, BetaJump};
pub use enumerate::{check_detailed_balance, enumerate, enumeration_cost, row_sum_error, stationary, Rule};
pub use toy::{bundled, ToySpace, ToyState, ToyWithin, BUNDLED};

use std::fmt;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::proposal::{DestinationPolicy, WithinModel};
use crate::samplers::{Candidate, CustomWeights, ManifestWeights, MtmI, MtmInv, QuadWeights, WeightScheme};
use crate::state::ChainState;
use crate::target::ModelSpace;

/// Default enumeration budget (term evaluations).
pub const DEFAULT_BUDGET: u128 = 200_000_000;

/// Balance threshold for a passing kernel.
pub const BALANCE_TOL: f64 = 1e-10;

/// Threshold above which the negative control counts as detected.
pub const NEGATIVE_CONTROL_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sampler {
    Mh,
    Gmtm,
    Rj,
    Gmtrj,
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampler::Mh => "MH",
            Sampler::Gmtm => "GMTM",
            Sampler::Rj => "RJ",
            Sampler::Gmtrj => "GMTRJ",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelConfig {
    pub sampler: Sampler,
    pub trials: usize,
    pub policy: DestinationPolicy,
    pub scheme: WeightScheme,
    pub omit_current: bool,
}

impl KernelConfig {
    pub fn single(sampler: Sampler) -> Self {
        Self {
            sampler,
            trials: 1,
            policy: DestinationPolicy::Same,
            scheme: WeightScheme::MtmInv,
            omit_current: false,
        }
    }

    pub fn multi(sampler: Sampler, trials: usize, policy: DestinationPolicy, scheme: WeightScheme) -> Self {
        Self {
            sampler,
            trials,
            policy,
            scheme,
            omit_current: false,
        }
    }
}

/// Deterministic positive custom weight used for toy spaces.
pub fn toy_custom_weight(c: &Candidate<'_, ChainState>, anchor: &ChainState) -> f64 {
    let d = c.state.params[0] - anchor.params[0];
    0.5 * c.log_target.unwrap_or(0.0) + 0.3 * d - 0.1 * d * d + 0.2 * c.log_rev
}

/// Exact kernel of the configured sampler on a toy space.
pub fn enumerate_kernel(space: &ToySpace, cfg: &KernelConfig, budget: u128) -> Result<DMatrix<f64>> {
    let states = space.chain_states();
    let index = |s: &ChainState| space.index_of(s);
    let rule = match cfg.sampler {
        Sampler::Mh | Sampler::Rj => Rule::Single,
        Sampler::Gmtm | Sampler::Gmtrj => Rule::MultiTry {
            trials: cfg.trials,
            policy: cfg.policy,
            omit_current: cfg.omit_current,
        },
    };
    let within = space.within();
    let adapter = WithinModel(&within);
    macro_rules! run {
        ($w:expr) => {
            match cfg.sampler {
                Sampler::Mh | Sampler::Gmtm => enumerate(&states, &index, &adapter, &$w, space, rule, budget),
                Sampler::Rj | Sampler::Gmtrj => enumerate(&states, &index, space, &$w, space, rule, budget),
            }
        };
    }
    match cfg.scheme {
        WeightScheme::MtmI => run!(MtmI),
        WeightScheme::MtmInv => run!(MtmInv),
        WeightScheme::Quad => run!(QuadWeights::new(space)),
        WeightScheme::Manifest => run!(ManifestWeights::new(space)),
        WeightScheme::Custom => run!(CustomWeights::new(toy_custom_weight, true)),
    }
}

/// One line of the verification report.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub space: String,
    pub kind: CheckKind,
    pub config: KernelConfig,
    pub value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// Max detailed-balance violation.
    Balance,
    /// Max |row sum − 1|.
    RowSum,
    /// Max |stationary − π|.
    Stationary,
    /// Max entrywise difference to the k = 1 reference kernel.
    Reduction,
    /// Balance violation of the corrupted kernel (must be large).
    NegativeControl,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::Balance => "balance",
            CheckKind::RowSum => "row-sum",
            CheckKind::Stationary => "stationary",
            CheckKind::Reduction => "reduction",
            CheckKind::NegativeControl => "negative-control",
        })
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        let policy = match c.policy {
            DestinationPolicy::Same => "same",
            DestinationPolicy::Varied => "varied",
        };
        write!(
            f,
            "{} {:<16} space={:<12} sampler={:<5} k={} policy={:<6} weights={:<7} value={:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.kind.to_string(),
            self.space,
            c.sampler.to_string(),
            c.trials,
            policy,
            c.scheme.to_string(),
            self.value
        )
    }
}

pub const SCHEMES: [WeightScheme; 5] = [
    WeightScheme::MtmI,
    WeightScheme::MtmInv,
    WeightScheme::Quad,
    WeightScheme::Manifest,
    WeightScheme::Custom,
];

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// Runs every balance, reduction and negative-control check on `spaces`.
pub fn run_suite(spaces: &[ToySpace]) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for space in spaces {
        let pi = space.probabilities();
        let mut push = |kind, config: KernelConfig, value: f64, passed: bool| {
            out.push(CheckResult {
                space: space.name.clone(),
                kind,
                config,
                value,
                passed,
            })
        };
        let mut samplers = Vec::new();
        if space.has_within() {
            samplers.push((Sampler::Mh, Sampler::Gmtm));
        }
        if space.has_jumps() {
            samplers.push((Sampler::Rj, Sampler::Gmtrj));
        }
        for (single, multi) in samplers {
            let base_cfg = KernelConfig::single(single);
            let base = enumerate_kernel(space, &base_cfg, DEFAULT_BUDGET)?;
            let bal = check_detailed_balance(&pi, &base);
            push(CheckKind::Balance, base_cfg, bal, bal <= BALANCE_TOL);
            let policies: &[DestinationPolicy] = if multi == Sampler::Gmtm {
                &[DestinationPolicy::Same]
            } else {
                &[DestinationPolicy::Same, DestinationPolicy::Varied]
            };
            for &policy in policies {
                for scheme in SCHEMES {
                    for k in 1..=3 {
                        let cfg = KernelConfig::multi(multi, k, policy, scheme);
                        let p = enumerate_kernel(space, &cfg, DEFAULT_BUDGET)?;
                        let bal = check_detailed_balance(&pi, &p);
                        push(CheckKind::Balance, cfg, bal, bal <= BALANCE_TOL);
                        let rs = row_sum_error(&p);
                        push(CheckKind::RowSum, cfg, rs, rs <= 1e-12);
                        if k == 1 {
                            let d = max_abs_diff(&p, &base);
                            push(CheckKind::Reduction, cfg, d, d <= 1e-14);
                        }
                        // Within-model kernels on multi-model spaces are reducible.
                        let irreducible = multi == Sampler::Gmtrj || space.n_models() == 1;
                        if k == 3 && scheme == WeightScheme::MtmInv && irreducible {
                            let st = stationary(&p)?;
                            let d = st.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                            push(CheckKind::Stationary, cfg, d, d <= BALANCE_TOL);
                        }
                    }
                }
            }
            let mut bad = KernelConfig::multi(multi, 2, DestinationPolicy::Same, WeightScheme::MtmInv);
            bad.omit_current = true;
            let p = enumerate_kernel(space, &bad, DEFAULT_BUDGET)?;
            let v = check_detailed_balance(&pi, &p);
            push(CheckKind::NegativeControl, bad, v, v > NEGATIVE_CONTROL_MIN);
        }
    }
    Ok(out)
}
