use std::path::Path;

use pacs_core::Error;

/// Failure of a CLI run, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Core(Error),
    Io(String),
}

impl CliError {
    pub fn validation(e: Error) -> Self {
        CliError::Validation(e.to_string())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 4,
            CliError::Core(e) => match e {
                Error::TruncationTooSmall { .. }
                | Error::DimensionMismatch { .. }
                | Error::InvalidParameter { .. }
                | Error::InvalidState(_)
                | Error::OutOfGrid { .. } => 2,
                Error::GridTooSmall(_)
                | Error::GridTooCoarse(_)
                | Error::KrausCutoffTooSmall { .. }
                | Error::NoThresholdInRange { .. } => 3,
                Error::Io(_) | Error::Csv(_) | Error::Json(_) => 4,
            },
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}
