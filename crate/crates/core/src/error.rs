use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value violates a type invariant (negative rate, ragged rows, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Exact integer arithmetic overflowed; the log-space path does not have this limit.
    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    #[error("root finder did not converge after {iterations} iterations; last bracket [{lo}, {hi}]")]
    NonConvergence { lo: f64, hi: f64, iterations: usize },

    /// Malformed count data, with the 1-based line it was found on.
    #[error("line {line}: {message}")]
    Data { line: u64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("Monte Carlo run aborted: {0}")]
    TooManyFailures(String),

    /// A consistency check failed in a way float noise cannot explain.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
