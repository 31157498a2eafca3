//! Convolutional flow network with reverse-mode differentiation.
//!
//! Everything is built on a flat `Vec<f64>` parameter vector and an explicit
//! operation tape, so a forward pass can be replayed backwards to produce
//! exact gradients with respect to every parameter and, when needed, the
//! input field. The architecture is a small U-Net conditioned on a scalar
//! time through sinusoidal features and a two-layer projection.

mod checkpoint;
mod embed;
mod error;
mod flow;
mod ops;
mod tape;
mod tensor;
mod unet;

pub use checkpoint::{load_params, save_params};
pub use embed::time_embed;
pub use error::NetError;
pub use flow::{
    flow_matching_reference_loss, fm_loss_from_output, lerp_path, warm_dip_loss,
    warm_dip_loss_and_grad, warm_sfm_loss, warm_sfm_loss_and_grad, FlowModel, Normalization,
};
pub use tape::{NodeId, Tape};
pub use tensor::Tensor;
pub use unet::{FlowNet, LayoutEntry, NetConfig, GROUP_NORM_EPS};

pub type Result<T> = std::result::Result<T, NetError>;
