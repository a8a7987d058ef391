use thiserror::Error;

pub type Result<T> = std::result::Result<T, FidaError>;

#[derive(Error, Debug)]
pub enum FidaError {
    #[error("shape mismatch: expected {expected}, got {got} ({context})")]
    ShapeMismatch {
        expected: String,
        got: String,
        context: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("malformed {format} data: {reason}")]
    Format {
        format: &'static str,
        reason: String,
    },

    #[error("external denoiser failed at iteration {iteration}: {reason}")]
    External { iteration: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FidaError {
    pub fn shape(expected: impl ToString, got: impl ToString, context: &'static str) -> Self {
        FidaError::ShapeMismatch {
            expected: expected.to_string(),
            got: got.to_string(),
            context,
        }
    }

    pub fn arg(msg: impl Into<String>) -> Self {
        FidaError::InvalidArgument(msg.into())
    }
}
