use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The requested configuration cannot be satisfied by the data
    /// (divisibility, K larger than N, gamma out of range, ...).
    #[error("infeasible configuration: {0}")]
    Config(String),

    /// A caller broke an operation's precondition (dimension mismatch,
    /// unbalanced capacities, incomplete coverage).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}:{line}: duplicate id `{id}`")]
    DuplicateId {
        path: PathBuf,
        line: u64,
        id: String,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("exhaustive search refused: {plans} candidate plans exceeds limit {limit}")]
    TooLarge { plans: f64, limit: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
