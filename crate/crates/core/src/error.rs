use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Operands act on different qubit counts.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An argument violates a precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A request exceeds a configured dense-simulation limit.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A conditioning event has (numerically) zero probability.
    #[error("impossible outcome: probability {0:.3e} is below threshold")]
    ImpossibleOutcome(f64),

    /// A density operator fails its positivity/trace/hermiticity checks.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Measured correlators are mutually inconsistent (no physical state
    /// can produce them), typically a sign of statistical noise that was
    /// not shrunk before bound evaluation.
    #[error("inconsistent correlators: {0}")]
    InconsistentCorrelators(String),

    /// No worst-case construction exists for the requested parameters.
    #[error("no WC state: {0}")]
    NoWcState(String),

    /// Not enough complete detection events to form an estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Malformed textual encoding.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
