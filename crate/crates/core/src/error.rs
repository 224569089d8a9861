use thiserror::Error;

/// Errors raised by the solvers and by dataset ingestion.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("infeasible coefficient vector: min weight {min_weight:e}, sum {sum}")]
    Infeasible { min_weight: f64, sum: f64 },

    #[error("every coordinate is active; no feasible direction exists")]
    AllActive,

    #[error("direction does not sum to zero (sum = {0:e})")]
    DirectionNotSumZero(f64),

    #[error("empty support: no weight exceeds the support tolerance")]
    EmptySupport,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dataset has rank zero")]
    ZeroRank,

    #[error("instance too large for exhaustive enumeration: n = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for HullError {
    fn from(err: std::io::Error) -> Self {
        HullError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HullError>;
