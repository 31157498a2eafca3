use ndarray::Array2;

use crate::{CoreError, Grid2D, Result};

/// 2D velocity field on a regular grid, in m/s.
///
/// Values are stored depth-major: the array has shape `(nz, nx)` and
/// `values[(iz, ix)]` is the velocity at depth index `iz`, lateral index
/// `ix`. All stored values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityModel {
    grid: Grid2D,
    values: Array2<f64>,
}

impl VelocityModel {
    pub fn new(grid: Grid2D, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.nz, grid.nx) {
            return Err(CoreError::invalid(format!(
                "value array shape {:?} does not match grid (nz={}, nx={})",
                values.dim(),
                grid.nz,
                grid.nx
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::invalid("velocity model contains non-finite values"));
        }
        // Store row-major regardless of how the caller built the array:
        // downstream code takes flat slice views of the values.
        let values = if values.is_standard_layout() {
            values
        } else {
            values.as_standard_layout().into_owned()
        };
        Ok(VelocityModel { grid, values })
    }

    /// Homogeneous model at velocity `v`.
    pub fn constant(grid: Grid2D, v: f64) -> Result<Self> {
        Self::new(grid, Array2::from_elem((grid.nz, grid.nx), v))
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// New model with the same grid and values transformed element-wise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.mapv(&f))
    }

    pub fn max_velocity(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_velocity(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Velocity model varying linearly with depth, from `v_top` at `iz = 0` to
/// `v_bottom` at `iz = nz - 1`. Used as the degraded starting model in the
/// poor-initialization scenario.
pub fn linear_gradient_model(grid: Grid2D, v_top: f64, v_bottom: f64) -> Result<VelocityModel> {
    if !(v_top > 0.0) || !(v_bottom > 0.0) {
        return Err(CoreError::invalid(format!(
            "velocities must be positive, got v_top={v_top}, v_bottom={v_bottom}"
        )));
    }
    let nz = grid.nz;
    let values = Array2::from_shape_fn((nz, grid.nx), |(iz, _)| {
        if nz == 1 {
            v_top
        } else {
            v_top + iz as f64 * (v_bottom - v_top) / (nz - 1) as f64
        }
    });
    VelocityModel::new(grid, values)
}
