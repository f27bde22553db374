//! Crate-wide error type.

use crate::fitting::FitTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A box has a non-positive extent or a non-finite field.
    #[error("invalid box: {0}")]
    InvalidBox(String),

    /// An argument violates a documented precondition (bad range, bad count).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A covariance matrix is not positive definite where one is required.
    #[error("degenerate covariance: {0}")]
    DegenerateCovariance(String),

    /// A numerical evaluation produced a non-finite value.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// An optimization run hit a non-finite loss. Carries whatever steps were
    /// recorded before the failure; the trace may be empty.
    #[error("fit diverged at step {step}")]
    Diverged { step: usize, trace: Box<FitTrace> },

    /// A table lookup referenced a column that does not exist.
    #[error("unknown column: {0}")]
    UnknownColumn(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
