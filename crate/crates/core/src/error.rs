use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("M must be ≥ 3 (got {0})")]
    ClusterTooSmall(usize),

    #[error("w must be > 0 (got {0})")]
    NonPositiveWeight(f64),

    #[error("gamma must be > 0 (got {0})")]
    NonPositiveGamma(f64),

    #[error("vertex ({cluster}, {port}) is not a valid vertex for M = {m}")]
    InvalidVertex { cluster: usize, port: usize, m: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {0} x {1}")]
    NotSquare(usize, usize),

    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),

    #[error("not an adjacency matrix: {0}")]
    NotAdjacency(String),

    #[error("no crossing: overlap difference does not change sign on [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },

    #[error("invalid range: lo = {lo} must be positive and below hi = {hi}")]
    InvalidRange { lo: f64, hi: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("full-space computation refused for M = {m} (limit {limit})")]
    TooLarge { m: usize, limit: usize },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
