//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Malformed input to an operation (zero polynomial, empty sequence, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An ARMA spec violated its invariants; the payload lists every violation.
    #[error("invalid ARMA spec: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    /// Plant parameters outside the admissible region (|a| <= 1 or c = 0).
    #[error("invalid plant: {0}")]
    InvalidPlant(String),

    /// Rational-filter evaluation hit a pole of the denominator.
    #[error("evaluation at pole: {0}")]
    EvaluationAtPole(String),

    /// A spectral integrand has a root too close to the unit circle.
    #[error("ill-conditioned integral: {0}")]
    IllConditionedIntegral(String),

    /// The bound solver found no admissible root; indicates a numerical bug.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// Operation requested outside its supported parameter range.
    #[error("out of scope: {0}")]
    OutOfScope(String),
}

pub type Result<T> = std::result::Result<T, Error>;
