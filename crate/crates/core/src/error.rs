use crate::C64;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("node {index} ({node}) is not a simple zero of Q: |Q| = {value:.3e}, |Q'| = {deriv:.3e}")]
    NotSimpleZero {
        index: usize,
        node: C64,
        value: f64,
        deriv: f64,
    },

    #[error("sampling condition violated: {identity} at node {node} (residual {residual:.3e})")]
    CertificationFailure {
        identity: &'static str,
        node: usize,
        residual: f64,
    },

    #[error("factorization failed: {reason} (worst point {point}, residual {residual:.3e})")]
    FactorizationFailure {
        reason: String,
        point: C64,
        residual: f64,
    },

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("missing sample for node {0}")]
    MissingSample(usize),

    #[error("elements belong to different kernels")]
    KernelMismatch,

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
