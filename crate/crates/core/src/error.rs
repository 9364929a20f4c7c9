use thiserror::Error;

/// Errors produced by the weak-distillation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} outcomes, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("decomposition is unphysical: target entry {value} at outcome {index}")]
    Unphysical { index: usize, value: f64 },

    #[error("dimension overflow: {0} qubits exceeds the supported maximum")]
    DimensionOverflow(u32),

    #[error("degenerate acceptance table: total acceptance mass {0:e}")]
    DegenerateTable(f64),

    #[error("rejection sampling exhausted {attempts} attempts without acceptance")]
    RejectionExhausted { attempts: u64 },

    #[error("infeasible failure-probability split: {0}")]
    InfeasibleSplit(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures caused by bad user input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::InvalidParameter { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
