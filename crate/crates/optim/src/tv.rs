use ndarray::Array2;
use sfwi_core::VelocityModel;

use crate::{OptimError, Result};

/// Smoothed isotropic total variation and its exact gradient.
///
/// Value is `sum sqrt(gx^2 + gz^2 + eps^2)` over all cells, with forward
/// differences `gx = m[iz, ix+1] - m[iz, ix]` (zero at the last column) and
/// `gz = m[iz+1, ix] - m[iz, ix]` (zero at the last row). `eps` keeps the
/// square root differentiable at flat regions; a constant model therefore
/// has value exactly `nx * nz * eps` and zero gradient.
pub fn tv_value_and_grad(model: &VelocityModel, eps: f64) -> Result<(f64, Array2<f64>)> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(OptimError::invalid(format!("eps must be finite and positive, got {eps}")));
    }
    let m = model.values();
    let (nz, nx) = m.dim();
    let mut value = 0.0;
    let mut grad = Array2::zeros((nz, nx));
    for iz in 0..nz {
        for ix in 0..nx {
            let gx = if ix + 1 < nx { m[(iz, ix + 1)] - m[(iz, ix)] } else { 0.0 };
            let gz = if iz + 1 < nz { m[(iz + 1, ix)] - m[(iz, ix)] } else { 0.0 };
            let r = (gx * gx + gz * gz + eps * eps).sqrt();
            value += r;
            if ix + 1 < nx {
                grad[(iz, ix + 1)] += gx / r;
                grad[(iz, ix)] -= gx / r;
            }
            if iz + 1 < nz {
                grad[(iz + 1, ix)] += gz / r;
                grad[(iz, ix)] -= gz / r;
            }
        }
    }
    Ok((value, grad))
}
