//! Model-quality metrics: relative L2 error, SSIM on jointly normalized
//! fields, effective matrix rank from singular values, and spectral
//! sharpness diagnostics comparing a corrupted model against a corrected
//! one.

mod error;
mod rank;
mod rel;
mod spectral;
mod ssim;

pub use error::MetricsError;
pub use rank::{effective_rank, singular_values, DEFAULT_RANK_ETA};
pub use rel::rel_l2;
pub use spectral::{deblur_report, SpectralBands, SpectralReport};
pub use ssim::{ssim, SsimConfig};

pub type Result<T> = std::result::Result<T, MetricsError>;
