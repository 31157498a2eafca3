use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Configuration that cannot be realized as a network, e.g. channel
    /// counts not divisible by the normalization group count.
    #[error("architecture error: {0}")]
    Architecture(String),

    /// Operation requires state that is not present, e.g. a backward pass
    /// without a recorded forward.
    #[error("state error: {0}")]
    State(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl NetError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        NetError::InvalidArgument(msg.into())
    }

    pub(crate) fn architecture(msg: impl Into<String>) -> Self {
        NetError::Architecture(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        NetError::Format { offset, message: msg.into() }
    }
}
