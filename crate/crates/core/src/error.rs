use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// Input rejected before any numerics ran.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The resolution-doubling study or an iteration did not settle.
    #[error("no convergence: {0}")]
    NonConvergence(String),
    /// A run produced NaN or blew up.
    #[error("numerical breakdown: {0}")]
    Breakdown(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Invalid(msg.into()))
}
