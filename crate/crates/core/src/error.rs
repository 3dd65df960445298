use thiserror::Error;

/// Errors raised by model construction, inference and fitting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transition matrix has no unique stationary distribution; supply an initial distribution")]
    NonUniqueStationary,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("sequence too short: need at least {min} observations, got {n}")]
    SequenceTooShort { n: usize, min: usize },
    #[error("emission family incompatible with data: {0}")]
    IncompatibleFamily(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("state {state} received no posterior weight")]
    EmptyState { state: usize },
    #[error("total weight is zero")]
    ZeroWeight,
    #[error("weighted variance {variance} does not exceed weighted mean {mean}")]
    Underdispersed { mean: f64, variance: f64 },
    #[error("variance floor hit for component {component}")]
    DegenerateVariance { component: usize },
    #[error("proportion matrix is rank deficient: {0}")]
    RankDeficient(String),
    #[error("kernel mixture denominator vanished for state {state}")]
    DegenerateDenominator { state: usize },
    #[error("label alignment supports at most 10 states, got {k}")]
    KTooLarge { k: usize },
    #[error("bandwidth grid is empty")]
    EmptyGrid,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("all {starts} EM starts failed; last error: {last}")]
    FitFailed { starts: usize, last: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;
