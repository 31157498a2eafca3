//! The four inversion drivers over a shared iteration/recording skeleton:
//! plain data-misfit descent, TV-regularized descent, network
//! reparameterization with a fixed input, and flow-guided target
//! refinement. All four spend an exact, configured number of physics
//! evaluations and write the same convergence record format, so runs are
//! directly comparable.

mod config;
mod dip;
mod error;
mod fwi;
mod record;
mod runner;
mod sfm;

pub use config::{InversionConfig, Method, SfmConfig, TvWeight};
pub use dip::run_dip_fwi;
pub use error::InvertError;
pub use fwi::{run_conventional_fwi, run_tv_fwi};
pub use record::{ConvergenceRecord, RecordRow};
pub use runner::{InversionOutput, InversionProblem};
pub use sfm::{ablation_grid, run_sfm_fwi, write_ablation_csv, AblationRow};

pub type Result<T> = std::result::Result<T, InvertError>;
