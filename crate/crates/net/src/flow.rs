//! Physical-units interface around the network: velocity fields in and out
//! are plain m/s grids, with a fixed affine normalization derived once from
//! the starting model. Keeping the normalization frozen makes the network a
//! deterministic function of (params, input, t) throughout an inversion.

use ndarray::Array2;

use crate::tensor::Tensor;
use crate::unet::{FlowNet, NetConfig};
use crate::{NetError, Result};

/// Affine map between velocities and network units: `y = (v - mean)/scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub mean: f64,
    pub scale: f64,
}

impl Normalization {
    /// Statistics of a reference field, with the scale floored at 5% of the
    /// mean magnitude so near-constant references still leave the network a
    /// usable output range.
    pub fn from_reference(reference: &Array2<f64>) -> Result<Self> {
        if reference.is_empty() {
            return Err(NetError::invalid("reference field is empty"));
        }
        if reference.iter().any(|v| !v.is_finite()) {
            return Err(NetError::invalid("reference field contains non-finite values"));
        }
        let n = reference.len() as f64;
        let mean = reference.sum() / n;
        let var = reference.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let scale = var.sqrt().max(0.05 * mean.abs()).max(1e-12);
        Ok(Normalization { mean, scale })
    }
}

/// The network plus its normalization: evaluates flow fields
/// `v(m, t)` and reparameterized models in physical units.
#[derive(Debug)]
pub struct FlowModel {
    net: FlowNet,
    norm: Normalization,
}

impl FlowModel {
    pub fn new(cfg: NetConfig, norm: Normalization) -> Result<Self> {
        if !(norm.scale > 0.0 && norm.scale.is_finite() && norm.mean.is_finite()) {
            return Err(NetError::invalid(format!(
                "normalization must be finite with positive scale, got {norm:?}"
            )));
        }
        Ok(FlowModel { net: FlowNet::new(cfg)?, norm })
    }

    pub fn net(&self) -> &FlowNet {
        &self.net
    }

    pub fn normalization(&self) -> Normalization {
        self.norm
    }

    pub fn n_params(&self) -> usize {
        self.net.n_params()
    }

    pub fn init_params(&self, seed: u64) -> Vec<f64> {
        self.net.init_params(seed)
    }

    fn encode(&self, field: &Array2<f64>) -> Result<Tensor> {
        let (h, w) = field.dim();
        let data: Vec<f64> =
            field.iter().map(|&v| (v - self.norm.mean) / self.norm.scale).collect();
        Tensor::new(vec![1, h, w], data)
    }

    fn to_grid(&self, t: &Tensor, factor: f64, offset: f64) -> Result<Array2<f64>> {
        let (_, h, w) = t.chw()?;
        let data: Vec<f64> = t.data().iter().map(|&v| offset + factor * v).collect();
        Array2::from_shape_vec((h, w), data)
            .map_err(|e| NetError::invalid(format!("output reshape failed: {e}")))
    }

    /// Flow field in m/s: `scale * raw_network((m - mean)/scale, t)`.
    pub fn velocity(&self, params: &[f64], m: &Array2<f64>, t: f64) -> Result<Array2<f64>> {
        let out = self.net.evaluate(params, self.encode(m)?, t)?;
        self.to_grid(&out, self.norm.scale, 0.0)
    }

    /// Flow field plus the flat parameter gradient for a cotangent given in
    /// physical units (the decode scale is folded into the chain rule).
    pub fn velocity_with_grad(
        &self,
        params: &[f64],
        m: &Array2<f64>,
        t: f64,
        cotangent: &Array2<f64>,
    ) -> Result<(Array2<f64>, Vec<f64>)> {
        let (h, w) = m.dim();
        if cotangent.dim() != (h, w) {
            return Err(NetError::invalid(format!(
                "cotangent shape {:?} does not match field shape {:?}",
                cotangent.dim(),
                m.dim()
            )));
        }
        let cot: Vec<f64> = cotangent.iter().map(|&g| g * self.norm.scale).collect();
        let cot = Tensor::new(vec![1, h, w], cot)?;
        let (out, grads) = self.net.evaluate_with_grad(params, self.encode(m)?, t, &cot)?;
        Ok((self.to_grid(&out, self.norm.scale, 0.0)?, grads))
    }

    /// Reparameterized model in m/s: `mean + scale * raw_network(z_enc, 0)`.
    /// `z` is the fixed network input, in physical units.
    pub fn reparam_model(&self, params: &[f64], z: &Array2<f64>) -> Result<Array2<f64>> {
        let out = self.net.evaluate(params, self.encode(z)?, 0.0)?;
        self.to_grid(&out, self.norm.scale, self.norm.mean)
    }

    pub fn reparam_model_with_grad(
        &self,
        params: &[f64],
        z: &Array2<f64>,
        cotangent: &Array2<f64>,
    ) -> Result<(Array2<f64>, Vec<f64>)> {
        let (h, w) = z.dim();
        if cotangent.dim() != (h, w) {
            return Err(NetError::invalid(format!(
                "cotangent shape {:?} does not match field shape {:?}",
                cotangent.dim(),
                z.dim()
            )));
        }
        let cot: Vec<f64> = cotangent.iter().map(|&g| g * self.norm.scale).collect();
        let cot = Tensor::new(vec![1, h, w], cot)?;
        let (out, grads) = self.net.evaluate_with_grad(params, self.encode(z)?, 0.0, &cot)?;
        Ok((self.to_grid(&out, self.norm.scale, self.norm.mean)?, grads))
    }
}

/// Linear interpolation `(1 - t) x0 + t x1`, exact at both endpoints.
pub fn lerp_path(x0: &Array2<f64>, x1: &Array2<f64>, t: f64) -> Result<Array2<f64>> {
    if x0.dim() != x1.dim() {
        return Err(NetError::invalid(format!(
            "path endpoints differ in shape: {:?} vs {:?}",
            x0.dim(),
            x1.dim()
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(NetError::invalid(format!("path time must lie in [0, 1], got {t}")));
    }
    Ok(x0.mapv(|v| (1.0 - t) * v) + &x1.mapv(|v| t * v))
}

/// Squared-L2 mismatch between a flow output and the straight-path target
/// velocity `x1 - x0`, with its cotangent with respect to the output.
pub fn fm_loss_from_output(
    v: &Array2<f64>,
    x0: &Array2<f64>,
    x1: &Array2<f64>,
) -> Result<(f64, Array2<f64>)> {
    if v.dim() != x0.dim() || x0.dim() != x1.dim() {
        return Err(NetError::invalid(format!(
            "shape mismatch: output {:?}, endpoints {:?} and {:?}",
            v.dim(),
            x0.dim(),
            x1.dim()
        )));
    }
    let mut loss = 0.0;
    let mut cot = Array2::zeros(v.dim());
    for ((vi, (a, b)), c) in v.iter().zip(x0.iter().zip(x1.iter())).zip(cot.iter_mut()) {
        let r = vi - (b - a);
        loss += r * r;
        *c = 2.0 * r;
    }
    Ok((loss, cot))
}

/// Reference flow-matching objective on the straight path: evaluates the
/// flow at `x_t = (1-t) x0 + t x1` and scores it against `x1 - x0`. Used
/// for validating the network machinery, not by the inversion loop.
pub fn flow_matching_reference_loss(
    flow: &FlowModel,
    params: &[f64],
    x0: &Array2<f64>,
    x1: &Array2<f64>,
    t: f64,
) -> Result<f64> {
    let xt = lerp_path(x0, x1, t)?;
    let v = flow.velocity(params, &xt, t)?;
    Ok(fm_loss_from_output(&v, x0, x1)?.0)
}

/// Warm-start objective for the flow: squared-L2 distance between the flow
/// at the starting model (t = 0) and the starting model itself.
pub fn warm_sfm_loss(flow: &FlowModel, params: &[f64], m0: &Array2<f64>) -> Result<f64> {
    let v = flow.velocity(params, m0, 0.0)?;
    Ok(v.iter().zip(m0.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Warm-start loss plus its flat parameter gradient.
pub fn warm_sfm_loss_and_grad(
    flow: &FlowModel,
    params: &[f64],
    m0: &Array2<f64>,
) -> Result<(f64, Vec<f64>)> {
    let v = flow.velocity(params, m0, 0.0)?;
    let cot = Array2::from_shape_fn(v.dim(), |idx| 2.0 * (v[idx] - m0[idx]));
    let loss = v.iter().zip(m0.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    let (_, grads) = flow.velocity_with_grad(params, m0, 0.0, &cot)?;
    Ok((loss, grads))
}

/// Warm-start objective for the reparameterized model: squared-L2 distance
/// between the emitted model and the starting model.
pub fn warm_dip_loss(
    flow: &FlowModel,
    params: &[f64],
    z: &Array2<f64>,
    m0: &Array2<f64>,
) -> Result<f64> {
    if z.dim() != m0.dim() {
        return Err(NetError::invalid(format!(
            "fixed input shape {:?} does not match reference shape {:?}",
            z.dim(),
            m0.dim()
        )));
    }
    let m = flow.reparam_model(params, z)?;
    Ok(m.iter().zip(m0.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
}

pub fn warm_dip_loss_and_grad(
    flow: &FlowModel,
    params: &[f64],
    z: &Array2<f64>,
    m0: &Array2<f64>,
) -> Result<(f64, Vec<f64>)> {
    if z.dim() != m0.dim() {
        return Err(NetError::invalid(format!(
            "fixed input shape {:?} does not match reference shape {:?}",
            z.dim(),
            m0.dim()
        )));
    }
    let m = flow.reparam_model(params, z)?;
    let cot = Array2::from_shape_fn(m.dim(), |idx| 2.0 * (m[idx] - m0[idx]));
    let loss = m.iter().zip(m0.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    let (_, grads) = flow.reparam_model_with_grad(params, z, &cot)?;
    Ok((loss, grads))
}
