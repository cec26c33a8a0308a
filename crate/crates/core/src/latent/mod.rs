//! Latent class model with an unknown number of classes.

mod data;
mod experiment;
mod model;
mod moves;

pub use data::{pattern_items, LcData, BUNDLED_CSV, ITEMS, PATTERNS};
pub use experiment::{run_latent, LcAlgorithm, LcConfig, LcOutput};
pub use model::{manifest_prob, relabel, LcModel, LcState};
pub use moves::{birth_log_a, split_log_a, LcJump, LcMove, LcRoute, LAMBDA_CLAMP};
