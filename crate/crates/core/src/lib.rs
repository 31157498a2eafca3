//! Core domain types for 2D acoustic waveform inversion: regular grids,
//! velocity models, acquisition geometry, source wavelets and the binary
//! file formats shared by the whole toolkit.
//!
//! Conventions used throughout:
//!
//! - Velocity fields are stored depth-major: `values[(iz, ix)]` with `iz`
//!   the slow (depth) axis. The binary field format follows the same order.
//! - All types are immutable after construction; operations return new
//!   values instead of mutating in place.

pub mod error;
pub mod gather;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod model;
pub mod smooth;
pub mod wavelet;

pub use error::CoreError;
pub use gather::ShotGather;
pub use geometry::AcquisitionGeometry;
pub use grid::Grid2D;
pub use io::{load_field, load_gather, save_field, save_gather};
pub use model::{linear_gradient_model, VelocityModel};
pub use smooth::gaussian_smooth;
pub use wavelet::{make_ricker, RickerWavelet};

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, CoreError>;
