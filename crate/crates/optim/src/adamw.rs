use crate::{OptimError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Decoupled decay rate; applied as `p *= 1 - lr * weight_decay` before
    /// the adaptive step, so it never mixes into the moment estimates.
    pub weight_decay: f64,
}

impl AdamWConfig {
    pub fn new(lr: f64) -> Result<Self> {
        AdamWConfig { lr, ..Default::default() }.validated()
    }

    pub fn with_weight_decay(lr: f64, weight_decay: f64) -> Result<Self> {
        AdamWConfig { lr, weight_decay, ..Default::default() }.validated()
    }

    fn validated(self) -> Result<Self> {
        if !(self.lr > 0.0) {
            return Err(OptimError::invalid(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) || !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(OptimError::invalid(format!(
                "betas must lie in (0, 1), got ({}, {})",
                self.beta1, self.beta2
            )));
        }
        if !(self.eps > 0.0) {
            return Err(OptimError::invalid(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(OptimError::invalid(format!(
                "weight_decay must be >= 0, got {}",
                self.weight_decay
            )));
        }
        Ok(self)
    }
}

impl Default for AdamWConfig {
    fn default() -> Self {
        AdamWConfig { lr: 2.0e-4, beta1: 0.9, beta2: 0.999, eps: 1.0e-8, weight_decay: 0.0 }
    }
}

/// AdamW over one flat parameter vector. Moment buffers are allocated on
/// construction and keep their shape for the optimizer's lifetime.
#[derive(Debug, Clone)]
pub struct AdamW {
    config: AdamWConfig,
    step: u64,
    m1: Vec<f64>,
    m2: Vec<f64>,
}

impl AdamW {
    pub fn new(config: AdamWConfig, n_params: usize) -> Self {
        AdamW { config, step: 0, m1: vec![0.0; n_params], m2: vec![0.0; n_params] }
    }

    pub fn config(&self) -> &AdamWConfig {
        &self.config
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update in place. `block` names the parameter vector in numeric
    /// errors (e.g. "model", "network").
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], block: &str) -> Result<()> {
        if params.len() != self.m1.len() || grads.len() != self.m1.len() {
            return Err(OptimError::invalid(format!(
                "parameter block '{block}': expected {} values, got params {} / grads {}",
                self.m1.len(),
                params.len(),
                grads.len()
            )));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(OptimError::numeric(block, format!("gradient[{i}] = {}", grads[i])));
        }

        self.step += 1;
        let c = &self.config;
        let bc1 = 1.0 - c.beta1.powi(self.step as i32);
        let bc2 = 1.0 - c.beta2.powi(self.step as i32);
        let decay = 1.0 - c.lr * c.weight_decay;

        for i in 0..params.len() {
            let g = grads[i];
            params[i] *= decay;
            self.m1[i] = c.beta1 * self.m1[i] + (1.0 - c.beta1) * g;
            self.m2[i] = c.beta2 * self.m2[i] + (1.0 - c.beta2) * g * g;
            let m_hat = self.m1[i] / bc1;
            let v_hat = self.m2[i] / bc2;
            params[i] -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
        }

        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(OptimError::numeric(block, format!("parameter[{i}] = {}", params[i])));
        }
        Ok(())
    }
}
