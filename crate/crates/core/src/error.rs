use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("derivative order {order} exceeds supported maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("mollifier fit failed: {0}")]
    Fit(String),

    #[error("non-finite integrand value at x = {x}")]
    Integrand { x: f64 },

    #[error("invalid parameters for {formula}: {reason}")]
    InvalidParams { formula: String, reason: String },

    #[error("unknown formula id `{0}`")]
    UnknownFormula(String),

    #[error("sweep failed: {0}")]
    Sweep(String),

    #[error("extrapolation failed: {0}")]
    Extrapolation(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
