use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("resource limit: {what} = {requested} exceeds cap {cap}")]
    ResourceLimit {
        what: String,
        requested: u128,
        cap: u128,
    },

    #[error("numeric failure after {iterations} iterations (last relative gap {last_gap:e})")]
    NumericFailure { iterations: usize, last_gap: f64 },

    #[error("iterate diverged (non-finite value) at iteration {n}")]
    Divergence { n: usize },

    #[error(
        "degenerate importance weights: effective sample size {ess:.3} < 10; \
         move y closer to the set or increase sigma"
    )]
    DegenerateWeights { ess: f64 },

    #[error("point lies on the frontier between components (gap {gap:e})")]
    Frontier { gap: f64 },

    #[error("insufficient data: need at least {needed} points, have {have}")]
    InsufficientData { needed: usize, have: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
