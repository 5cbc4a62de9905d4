use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("malformed {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Codec(#[from] image::ImageError),
}

impl ProbeError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        ProbeError::InvalidArgument(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        ProbeError::DimensionMismatch(msg.into())
    }
}

pub type Result<T, E = ProbeError> = std::result::Result<T, E>;
