//! Target densities.
//!
//! Log densities are plain `f64`. Zero probability is `f64::NEG_INFINITY`;
//! NaN never leaves this module's implementors (see [`sentinel`]).

use crate::quad::LocalExpansion;
use crate::state::{ChainState, ModelIndex};

/// Unnormalised log posterior `log[f(y|m,θ) p(θ|m) p(m)]`.
///
/// The additive constant must be shared by every state of a run.
pub trait TargetDensity<S = ChainState> {
    fn log_target(&self, state: &S) -> f64;
}

impl<S, T: TargetDensity<S> + ?Sized> TargetDensity<S> for &T {
    fn log_target(&self, state: &S) -> f64 {
        (**self).log_target(state)
    }
}

/// Maps NaN to the zero-probability sentinel.
#[inline]
pub fn sentinel(value: f64) -> f64 {
    if value.is_nan() {
        f64::NEG_INFINITY
    } else {
        value
    }
}

/// A model space with a declared parameter dimension per model.
pub trait ModelSpace {
    fn n_models(&self) -> usize;
    fn dim(&self, model: ModelIndex) -> usize;

    fn check(&self, state: &ChainState) -> crate::Result<()> {
        if state.model.0 >= self.n_models() {
            return Err(crate::Error::Invalid(format!(
                "model {} outside 1..={}",
                state.model.number(),
                self.n_models()
            )));
        }
        let expected = self.dim(state.model);
        if state.dim() != expected {
            return Err(crate::Error::Dimension {
                expected,
                actual: state.dim(),
            });
        }
        Ok(())
    }
}

/// A target with analytic score and curvature, used by the quadratic weights.
pub trait SmoothTarget: TargetDensity<ChainState> {
    /// Gradient and Hessian of `log π` at `state`.
    fn expansion(&self, state: &ChainState) -> LocalExpansion;

    /// `anchor` expressed in the coordinates of `model`. Shared coordinates
    /// are carried over; coordinates the anchor lacks take their pad value.
    fn embed(&self, anchor: &ChainState, model: ModelIndex) -> ChainState;
}

/// A cheap surrogate of the target used by the GMTRJ-man weights, e.g. an
/// incomplete (manifest) likelihood that ignores latent allocations.
pub trait ManifestTarget<S> {
    fn log_manifest(&self, state: &S) -> f64;
}

impl<S, T: ManifestTarget<S> + ?Sized> ManifestTarget<S> for &T {
    fn log_manifest(&self, state: &S) -> f64 {
        (**self).log_manifest(state)
    }
}
