use std::path::PathBuf;

use sfwi_invert::InvertError;
use sfwi_solver::SolverError;
use thiserror::Error;

/// Documented process exit codes.
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// One entry per offending key; all are reported together.
    #[error("configuration invalid:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] sfwi_core::CoreError),
    #[error(transparent)]
    Solver(#[from] sfwi_solver::SolverError),
    #[error(transparent)]
    Net(#[from] sfwi_net::NetError),
    #[error(transparent)]
    Metrics(#[from] sfwi_metrics::MetricsError),
    #[error(transparent)]
    Invert(#[from] sfwi_invert::InvertError),
}

impl CliError {
    pub fn config(errors: Vec<String>) -> Self {
        CliError::Config(errors)
    }

    pub fn config_one(message: impl Into<String>) -> Self {
        CliError::Config(vec![message.into()])
    }

    pub fn malformed(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Malformed { path: path.into(), message: message.into() }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    /// Exit code contract: 0 success, 2 config validation, 3 numeric
    /// divergence, 4 I/O; anything else is a generic failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Malformed { .. } | CliError::Io { .. } => EXIT_IO,
            CliError::Core(sfwi_core::CoreError::Io(_)) => EXIT_IO,
            CliError::Solver(e) => solver_code(e),
            CliError::Invert(e) => invert_code(e),
            CliError::Metrics(sfwi_metrics::MetricsError::Numeric(_)) => EXIT_DIVERGED,
            _ => 1,
        }
    }
}

fn solver_code(e: &SolverError) -> u8 {
    match e {
        SolverError::Stability { .. } | SolverError::Divergence { .. } => EXIT_DIVERGED,
        _ => 1,
    }
}

fn invert_code(e: &InvertError) -> u8 {
    match e {
        InvertError::Diverged { .. } => EXIT_DIVERGED,
        // Step attribution wraps the real cause; classify what is inside.
        InvertError::AtStep { source, .. } => invert_code(source),
        InvertError::Solver(s) => solver_code(s),
        InvertError::Optim(sfwi_optim::OptimError::Numeric { .. }) => EXIT_DIVERGED,
        InvertError::Metrics(sfwi_metrics::MetricsError::Numeric(_)) => EXIT_DIVERGED,
        InvertError::Io(_) => EXIT_IO,
        _ => 1,
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
