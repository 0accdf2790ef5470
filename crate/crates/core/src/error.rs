use thiserror::Error;

/// Errors raised by model construction, solvers and measurements.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("N = {n} exceeds the dense capacity limit of {max} sites")]
    Capacity { n: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver failed after {iterations} iterations: {reason}")]
    Solver { iterations: usize, reason: String },

    #[error("ambiguous input: {0}")]
    Ambiguity(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that come from numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Solver { .. } | Error::Ambiguity(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
