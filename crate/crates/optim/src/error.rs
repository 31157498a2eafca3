use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Non-finite value encountered during an update; names the parameter
    /// block so the caller can tell model from network divergence.
    #[error("non-finite value in parameter block '{block}': {message}")]
    Numeric { block: String, message: String },
}

impl OptimError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        OptimError::InvalidArgument(msg.into())
    }

    pub fn numeric(block: impl Into<String>, msg: impl Into<String>) -> Self {
        OptimError::Numeric { block: block.into(), message: msg.into() }
    }
}
