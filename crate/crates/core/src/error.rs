//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by validation, parameter checks, and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Structural validation failed (non-Hermitian input, dimension mismatch,
    /// invalid density matrix, malformed file).
    #[error("validation error: {0}")]
    Validation(String),

    /// A parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A scalar function was applied outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical computation failed (overflow, NaN, vanishing normalizer).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Requested precision cannot be met with the given discretization.
    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
