use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Both fields collapse to a single value, so normalization and local
    /// statistics are undefined.
    #[error("degenerate value range: {0}")]
    DegenerateRange(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl MetricsError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        MetricsError::InvalidArgument(msg.into())
    }
}
