use std::path::PathBuf;

use dephtomo::TomographyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("scenario: {0}")]
    Scenario(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: TomographyError,
    },
}

impl CliError {
    /// 1 for domain failures, 2 for I/O and parse failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Stage { .. } => 1,
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Scenario(_) => 2,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> StageExt<T> for Result<T, TomographyError> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}
