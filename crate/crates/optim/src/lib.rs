//! Optimizer and regularization pieces shared by every inversion driver:
//! AdamW over flat parameter vectors, box projection onto physical velocity
//! bounds, and a smoothed isotropic total-variation penalty.

mod adamw;
mod bounds;
mod error;
mod tv;

pub use adamw::{AdamW, AdamWConfig};
pub use bounds::Bounds;
pub use error::OptimError;
pub use tv::tv_value_and_grad;

pub type Result<T> = std::result::Result<T, OptimError>;
