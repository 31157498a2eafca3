//! Time-domain constant-density acoustic modeling and its exact discrete
//! gradient.
//!
//! The forward solver is second-order in time and eighth-order in space,
//! with convolutional PML absorbing layers on all four sides (no free
//! surface). The model gradient is obtained by reverse-mode differentiation
//! of the discrete time loop itself, so it matches finite differences of
//! the misfit to rounding, not merely to discretization error.
//!
//! Shots are independent: with the `parallel` feature they fan out over a
//! rayon pool and are reduced in fixed shot order, so results are
//! bit-identical at any thread count.

mod adjoint;
mod config;
mod degrade;
mod error;
mod forward;
mod misfit;
mod pml;
mod stencil;

pub use adjoint::model_gradient;
pub use config::{SolverConfig, SPATIAL_ORDER, TIME_ORDER};
pub use degrade::{add_gaussian_noise, subsample_shots};
pub use error::SolverError;
pub use forward::{simulate_shots, WavefieldState};
pub use misfit::data_misfit;

/// Misfit derivative with respect to each model cell, same shape as the
/// model values, units of the misfit per (m/s).
pub type GradientField = ndarray::Array2<f64>;

pub type Result<T> = std::result::Result<T, SolverError>;

/// Map over shot indices, in parallel when the `parallel` feature is on.
/// Collection preserves index order, which keeps reductions deterministic.
pub(crate) fn map_shots<T: Send>(
    n_shots: usize,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n_shots).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_shots).map(f).collect()
    }
}
