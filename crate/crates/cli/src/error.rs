use std::path::PathBuf;

use thiserror::Error;

/// Everything the command line can fail with, grouped by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Compute(#[from] deltaprime_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// Machine-readable class printed before the message.
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "ParseError",
            CliError::Validation(_) => "ValidationError",
            CliError::Compute(e) => e.class(),
            CliError::Io { .. } => "IoError",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) => 2,
            // Rejected inputs, e.g. a negative half-width or a malformed table.
            CliError::Compute(
                deltaprime_core::Error::InvalidInput(_)
                | deltaprime_core::Error::NonPositiveMass { .. }
                | deltaprime_core::Error::Table { .. },
            ) => 2,
            CliError::Compute(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}
