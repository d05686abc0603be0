use thiserror::Error;

/// Errors produced by the library.
///
/// Contract violations (dimension mismatches, out-of-range indices, invalid
/// probabilities) panic instead; these variants cover data-dependent failures
/// a caller can reasonably hit and handle.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("parameter vector is zero; the optimal action is undefined")]
    ZeroParameter,
    #[error("least-squares design has no complete round-robin block")]
    IncompleteDesign,
    #[error("design matrix is rank deficient (condition estimate {0:.3e})")]
    SingularDesign(f64),
    #[error("policy emitted an infeasible action at step {step}")]
    PolicyViolation { step: usize },
    #[error("action set must be centered at the origin")]
    NotCentered,
    #[error("action set must be the unit ball")]
    UnsupportedActionSet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
