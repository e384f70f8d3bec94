use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid fractional order {0}: must lie in (0, 1]")]
    InvalidOrder(f64),

    #[error("insufficient history: need at least {needed} samples, have {have}")]
    InsufficientHistory { needed: usize, have: usize },

    #[error("solver diverged at step {step} (last valid time {last_valid_time})")]
    Divergence { step: usize, last_valid_time: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("polynomial degree {degree} exceeds the supported bound {bound}")]
    DegreeBound { degree: usize, bound: usize },

    #[error("parse error at `{key}`: {message}")]
    Parse { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
