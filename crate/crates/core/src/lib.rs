//! Generalized multiple-try reversible jump (GMTRJ) samplers.
//!
//! The crate is organised around a small set of abstractions shared by every
//! kernel:
//!
//! * [`TargetDensity`] evaluates the unnormalised log posterior of a state,
//! * [`ProposalKernel`] is a fixed-dimension proposal for MH / GMTM moves,
//! * [`JumpProposal`] draws transdimensional [`Trial`]s together with the
//!   forward and reverse proposal densities and the Jacobian of the jump,
//! * [`WeightFunction`] assigns the selection weights used by the
//!   multiple-try kernels.
//!
//! On top of these sit the four kernels in [`samplers`], the two case studies
//! ([`logistic`] and [`latent`]), the chain [`diagnostics`], and the exact
//! kernel enumeration in [`oracle`].

pub mod diagnostics;
pub mod error;
pub mod latent;
pub mod logistic;
pub mod oracle;
pub mod proposal;
pub mod quad;
pub mod rng;
pub mod samplers;
pub mod state;
pub mod target;
pub mod timing;

pub use error::{Error, Result};
pub use proposal::{DestinationPolicy, JumpMap, JumpProposal, MoveSpec, ProposalKernel, Trial};
pub use quad::LocalExpansion;
pub use rng::RngStream;
pub use samplers::{
    gmtm_step, gmtrj_step, mh_step, rj_step, select_trial, Outcome, Step, WeightFunction, WeightScheme,
};
pub use state::{ChainState, ModelIndex};
pub use target::{ManifestTarget, SmoothTarget, TargetDensity};
