use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum UrnError {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("reinforcement weights sum to zero; the interaction matrix is malformed")]
    ZeroWeight,

    #[error("point {0:?} is not in the interior of the simplex")]
    NotInterior(Vec<f64>),

    #[error("finite-difference step {step} leaves the simplex chart at {point:?}")]
    ChartViolation { point: Vec<f64>, step: f64 },

    #[error("ball count would exceed 2^53 after {steps} steps from {initial} balls")]
    CountOverflow { initial: u64, steps: u64 },

    #[error("root certification failed: {0}")]
    RootCertification(String),

    #[error("{value} is not a root of the characteristic polynomial (residual {residual:e})")]
    NotARoot { value: f64, residual: f64 },

    #[error("phase predicate is not monotone on [{lo}, {hi}]")]
    NonMonotone { lo: f64, hi: f64 },

    #[error("model family mismatch: {0}")]
    FamilyMismatch(String),

    #[error("no stationary points supplied for a point-limit verdict")]
    NoStationaryPoints,
}

pub type Result<T> = std::result::Result<T, UrnError>;
