use thiserror::Error;

/// Failures reported by the solvers and special-function kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
    #[error("normalization below threshold: {0}")]
    Normalization(String),
    #[error("integration lost accuracy at t = {t}: {reason}")]
    Instability { t: f64, reason: String },
    #[error("series not converged at k_max = {k_max}")]
    Truncation { k_max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
