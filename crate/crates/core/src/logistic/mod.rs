//! Binary logistic regression with five nested models.

mod data;
mod experiment;
mod model;
mod proposal;

pub use data::{BinomialTable, Cell, BUNDLED_CSV, SAMPLE_SIZE};
pub use experiment::{run_experiment, Algorithm, ExperimentConfig, RunOutput};
pub use model::{Coding, LogisticModel, MODEL_COLUMNS, N_MODELS};
pub use proposal::{Embedding, GaussianWalk, LogisticJump, NestedJumpMap};
