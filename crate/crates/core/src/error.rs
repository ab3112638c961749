use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("conditioning error: {0}")]
    Conditioning(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("verification error: {0}")]
    Verification(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the `floquet` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Shape(_)
            | Error::Range(_)
            | Error::Validation(_)
            | Error::Parse(_)
            | Error::Usage(_) => 2,
            Error::Numeric(_) | Error::Conditioning(_) | Error::Accuracy(_) => 3,
            Error::Verification(_) => 4,
            Error::Io(_) => 1,
        }
    }

    /// Short machine-readable tag, used in structured error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::Range(_) => "range",
            Error::Numeric(_) => "numeric",
            Error::Conditioning(_) => "conditioning",
            Error::Accuracy(_) => "accuracy",
            Error::Verification(_) => "verification",
            Error::Validation(_) => "validation",
            Error::Parse(_) => "parse",
            Error::Usage(_) => "usage",
            Error::Io(_) => "io",
        }
    }
}
