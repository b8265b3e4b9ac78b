use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the search engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {position}: {message}")]
    Parse { position: String, message: String },

    #[error("search space has {size} architectures, exceeding the enumeration cap of {cap}")]
    SpaceTooLarge { size: String, cap: u64 },

    #[error("invalid config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}:{line}: {message}")]
    TabularLoad {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("initialization produced no evaluated architectures")]
    EmptyInitialization,

    #[error(transparent)]
    Evaluation(#[from] EvalError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failure of a single fitness evaluation. These never abort a search; the
/// affected architecture is discarded.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no tabular entry for architecture `{0}`")]
    MissingEntry(String),

    #[error("evaluation timed out after {secs:.3}s (request {id})")]
    Timeout { id: u64, secs: f64 },

    #[error("evaluator failure: {0}")]
    Failure(String),

    #[error("evaluator rejected request: {0}")]
    Rejected(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
