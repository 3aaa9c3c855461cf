use thiserror::Error;

/// Failures surfaced by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid party count {0}: at least one party is required")]
    InvalidPartyCount(usize),

    #[error("classical bound by exhaustion refused for m = {m}: limit is {limit} parties")]
    ExhaustionLimitExceeded { m: usize, limit: usize },

    #[error("correlator returned a non-finite value {value} for setting {setting}")]
    NonFiniteCorrelator { setting: String, value: f64 },

    #[error("quadrature did not converge: estimate {estimate}, error estimate {error} after {subdivisions} subdivisions")]
    QuadratureNonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("integrand produced a non-finite value at x = {0}")]
    NonFiniteIntegrand(f64),

    #[error("matrix must have dimension at least 1")]
    EmptyMatrix,

    #[error("matrix is not symmetric/finite at ({row}, {col})")]
    InvalidMatrix { row: usize, col: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative outcome probability {value} for outcome {outcome}")]
    NegativeProbability { outcome: String, value: f64 },

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("beam splitter ports must differ, got ({0}, {0})")]
    PortCollision(usize),

    #[error("conditional state has vanishing norm (density {0:e})")]
    ZeroNormConditional(f64),

    #[error("mode count mismatch: {0} vs {1}")]
    ModeCountMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
