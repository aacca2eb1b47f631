use std::io;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("pipeline error: {0}")]
    Pipeline(String),

    #[error("{path}: {cause}")]
    Io { path: String, cause: io::Error },

    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, cause: io::Error) -> Self {
        Error::Io { path: path.display().to_string(), cause }
    }

    pub(crate) fn format(path: &std::path::Path, reason: impl Into<String>) -> Self {
        Error::Format { path: path.display().to_string(), reason: reason.into() }
    }
}
