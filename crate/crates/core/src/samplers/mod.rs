//! MH, GMTM, RJ and GMTRJ kernels.

mod kernels;
mod select;
mod weights;

pub use kernels::{
    current_log_weight, gmtm_step, gmtrj_step, log_acceptance, mh_step, rj_step, trial_log_weight, Outcome, Step,
};
pub use select::{log_sum_exp, select_trial, selection_log_probs};
pub use weights::{
    Candidate, CustomWeights, ManifestWeights, MtmI, MtmInv, QuadAnchor, QuadWeights, WeightFunction, WeightScheme,
};
