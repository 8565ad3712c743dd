use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PnrError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Probability mass beyond the tabulated photon numbers exceeds the tolerance.
    #[error("truncation error: {mass:.3e} of the input distribution lies beyond m_max = {m_max} (tolerance {tol:.1e})")]
    Truncation { mass: f64, m_max: usize, tol: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),
}

pub type Result<T> = std::result::Result<T, PnrError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(PnrError::InvalidArgument(msg.into()))
}
