use thiserror::Error;

pub type Result<T, E = CoreError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value at flat index {index} of component {component}")]
    NonFinite { component: usize, index: usize },

    #[error("field is not flagged divergence-free")]
    NotDivergenceFree,

    #[error("grid mismatch: expected n = {expected}, found n = {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error(
        "exponential damping overflow: beta * max|u|^2 = {exponent:.6e} exceeds {limit} (max|u| = {max_speed:.6e})"
    )]
    DampingOverflow {
        max_speed: f64,
        exponent: f64,
        limit: f64,
    },

    #[error("series budget exceeded: beta * max|u|^2 = {exponent:.6e} > {budget}")]
    SeriesBudget { exponent: f64, budget: f64 },

    #[error("time step underflow at t = {t:.9e}: dt = {dt:.3e}")]
    DtUnderflow { t: f64, dt: f64 },

    #[error("diagnostic needs {needed} samples, trajectory has {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("schema: {0}")]
    Schema(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CoreError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        CoreError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
