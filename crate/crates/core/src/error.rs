use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("model {to} is not reachable from model {from}")]
    Unreachable { from: usize, to: usize },

    #[error("no trial has a positive selection weight")]
    NoValidTrial,

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("cannot read data file {path}: {source}")]
    Data {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("trace format version {found} does not match expected version {expected}")]
    TraceVersion { expected: String, found: String },

    #[error("kernel enumeration needs {needed} evaluations, budget is {budget}")]
    Budget { needed: u128, budget: u128 },

    #[error("empty trace")]
    EmptyTrace,

    #[error("Monte Carlo variance is zero")]
    ZeroVariance,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }
}
