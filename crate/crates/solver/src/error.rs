use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(
        "time step {dt} s violates the CFL stability bound for v_max = {v_max} m/s; \
         required dt <= {required_dt} s"
    )]
    Stability { dt: f64, v_max: f64, required_dt: f64 },
    #[error("wavefield became non-finite at time step {step}")]
    Divergence { step: usize },
    #[error(
        "wavefield history needs {needed_bytes} bytes, over the {limit_bytes} byte limit; \
         set checkpoint_interval (suggest {suggested_interval}) to trade recompute for memory"
    )]
    Resource { needed_bytes: usize, limit_bytes: usize, suggested_interval: usize },
}

impl SolverError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        SolverError::InvalidArgument(msg.into())
    }
}
