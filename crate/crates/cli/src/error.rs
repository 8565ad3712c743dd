use std::path::PathBuf;

use pnrq_core::PnrError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] PnrError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Core(PnrError::InvalidArgument(_)) => 2,
            Self::Core(PnrError::NoSolution(_)) => 3,
            Self::Core(PnrError::Truncation { .. }) => 4,
            Self::Io { .. } | Self::Json { .. } | Self::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
