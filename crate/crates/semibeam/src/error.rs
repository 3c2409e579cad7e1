//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A model or configuration value violates one of its invariants.
    /// Carries the offending key so callers can report it precisely.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("interpolation exponents must satisfy alpha < beta < gamma, got ({alpha}, {beta}, {gamma})")]
    ExponentOrder { alpha: f64, beta: f64, gamma: f64 },

    #[error("interpolation ratio is undefined for the zero field")]
    ZeroField,

    #[error("evaluation point {point} lies outside [0, {length}]")]
    PointOutsideDomain { point: f64, length: f64 },

    /// A direct solve met a numerically singular matrix where the model
    /// guarantees invertibility; this signals an assembly bug, not a
    /// property of the continuous problem.
    #[error("singular matrix in {context}")]
    Singular { context: String },

    /// The shifted system `i*lambda*I - B` is numerically singular, i.e.
    /// `lambda` sits at an eigenfrequency of the truncation.
    #[error("resolvent solve near-singular at lambda = {lambda} (rcond = {rcond:.3e})")]
    NearSingular { lambda: f64, rcond: f64 },

    #[error("energy Gram factorization failed: {0}")]
    GramFactorization(String),

    #[error("not enough samples: have {have}, need at least {need}")]
    TooFewSamples { have: usize, need: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("linear algebra backend: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_owned(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
