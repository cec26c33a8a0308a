use std::fmt;

/// Failure of a subcommand, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Verification found a failing check (exit 1).
    Verify(String),
    /// Invalid configuration or arguments (exit 2).
    Config(String),
    /// Missing or malformed input data, or unreadable traces (exit 3).
    Data(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Verify(_) => 1,
            Self::Config(_) => 2,
            Self::Data(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Verify(m) => write!(f, "verification failed: {m}"),
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gmtrj_core::Error> for CliError {
    fn from(e: gmtrj_core::Error) -> Self {
        use gmtrj_core::Error as E;
        match e {
            E::Data { .. } | E::TraceVersion { .. } | E::EmptyTrace | E::Io(_) | E::Parse { .. } => {
                Self::Data(e.to_string())
            }
            _ => Self::Config(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
