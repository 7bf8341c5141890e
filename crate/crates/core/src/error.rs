use thiserror::Error;

/// Errors raised by the Fock-space engine and the physics layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("truncation policy: {0}")]
    Truncation(String),

    #[error("state validation failed ({invariant}): {detail}")]
    Validation {
        invariant: &'static str,
        detail: String,
    },

    #[error("state file: {0}")]
    Load(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("degenerate denominator at sigma_a={sigma_a}, sigma_b={sigma_b}: {detail}")]
    Degenerate {
        sigma_a: f64,
        sigma_b: f64,
        detail: String,
    },

    #[error("no root for target {target} on the bracket; attainable range [{low}, {high}]")]
    NoRoot { target: f64, low: f64, high: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
