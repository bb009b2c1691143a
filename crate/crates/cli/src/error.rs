use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {msg}", path.display())]
    Parse { path: PathBuf, msg: String },

    #[error("numerical failure: {0}")]
    Numerical(netinv::Error),

    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        CliError::Parse { path: path.into(), msg: msg.into() }
    }

    /// 2 for bad input, 3 for numerical or verification failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } | CliError::Parse { .. } => 2,
            CliError::Numerical(_) | CliError::Verify(_) => 3,
        }
    }
}

impl From<netinv::Error> for CliError {
    fn from(e: netinv::Error) -> Self {
        use netinv::Error::*;
        match e {
            InvalidGrid(_) | ShapeMismatch { .. } | InvalidParameter(_) | InteriorLoad { .. } | InvalidPositionMap(_)
            | IndexOutOfRange { .. } | NonFinite { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e),
        }
    }
}
