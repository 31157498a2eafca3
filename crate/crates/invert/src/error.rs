use thiserror::Error;

#[derive(Debug, Error)]
pub enum InvertError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Wraps any failure that occurred inside the iteration loop so callers
    /// can see how far the run got.
    #[error("physics step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<InvertError>,
    },

    #[error("diverged at physics step {step}: {message}")]
    Diverged { step: usize, message: String },

    #[error(transparent)]
    Core(#[from] sfwi_core::CoreError),

    #[error(transparent)]
    Solver(#[from] sfwi_solver::SolverError),

    #[error(transparent)]
    Net(#[from] sfwi_net::NetError),

    #[error(transparent)]
    Optim(#[from] sfwi_optim::OptimError),

    #[error(transparent)]
    Metrics(#[from] sfwi_metrics::MetricsError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl InvertError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        InvertError::InvalidArgument(msg.into())
    }

    pub(crate) fn at_step(step: usize, source: impl Into<InvertError>) -> Self {
        InvertError::AtStep { step, source: Box::new(source.into()) }
    }
}
