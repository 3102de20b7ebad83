use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("codec failure: {0}")]
    Codec(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("calibration table does not match codec: {0}")]
    StaleCalibration(String),

    #[error("stationary distribution did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Codec,
    Precondition,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Codec(_) => ErrorKind::Codec,
            Error::Precondition(_) | Error::NoConvergence(_) => ErrorKind::Precondition,
            Error::InvalidInput(_)
            | Error::Parse { .. }
            | Error::StaleCalibration(_)
            | Error::Io(_)
            | Error::Json(_) => ErrorKind::Input,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
