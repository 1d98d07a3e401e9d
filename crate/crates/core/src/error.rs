use thiserror::Error;

/// Errors raised by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("process count {0} outside supported range [2, 16]")]
    ProcessCount(usize),

    #[error("edge ({from}, {to}) has an endpoint outside [0, {n})")]
    EndpointOutOfRange { from: usize, to: usize, n: usize },

    #[error("process {process} outside [0, {n})")]
    ProcessOutOfRange { process: usize, n: usize },

    #[error("mismatched process counts: {left} vs {right}")]
    MismatchedN { left: usize, right: usize },

    #[error("model has no generators")]
    EmptyModel,

    #[error("permutation enumeration is limited to n <= {limit}, got n = {n}")]
    SymmetryGuard { n: usize, limit: usize },

    #[error("{what} budget of {limit} exceeded")]
    BudgetExceeded { what: &'static str, limit: u64 },

    #[error("value undefined: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("complex is not pure")]
    NotPure,

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("integer overflow during exact elimination")]
    Overflow,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("bounds are inconsistent: {0}")]
    Inconsistent(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
