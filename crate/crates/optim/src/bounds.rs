use sfwi_core::VelocityModel;

use crate::{OptimError, Result};

/// Physical velocity box. Every driver projects onto it after each model
/// update so intermediate models stay simulable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub c_min: f64,
    pub c_max: Option<f64>,
}

impl Bounds {
    pub fn new(c_min: f64, c_max: Option<f64>) -> Result<Self> {
        if !(c_min > 0.0) {
            return Err(OptimError::invalid(format!("c_min must be positive, got {c_min}")));
        }
        if let Some(hi) = c_max {
            if !(hi > c_min) {
                return Err(OptimError::invalid(format!(
                    "c_max must exceed c_min, got c_min={c_min}, c_max={hi}"
                )));
            }
        }
        Ok(Bounds { c_min, c_max })
    }

    pub fn clamp(&self, v: f64) -> f64 {
        let v = v.max(self.c_min);
        match self.c_max {
            Some(hi) => v.min(hi),
            None => v,
        }
    }

    /// Element-wise projection onto the box, the L2-nearest feasible point.
    pub fn project(&self, model: &VelocityModel) -> VelocityModel {
        model
            .map(|v| self.clamp(v))
            .expect("clamp of finite values within finite bounds stays finite")
    }

    /// In-place variant for flat parameter vectors.
    pub fn project_slice(&self, values: &mut [f64]) {
        for v in values {
            *v = self.clamp(*v);
        }
    }
}
