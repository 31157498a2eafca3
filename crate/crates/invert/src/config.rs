use sfwi_net::NetConfig;
use sfwi_optim::Bounds;

use crate::{InvertError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Gradient descent directly on the model cells.
    Fwi,
    /// As `Fwi` plus a weighted total-variation penalty.
    FwiTv,
    /// Model reparameterized by a network with a fixed input; the network
    /// weights are the unknowns.
    Dip,
    /// Flow-guided target refinement along the straight path from the
    /// starting model.
    Sfm,
}

/// Weight of the total-variation term. `Auto` resolves against the first
/// evaluation: `lambda = factor * misfit_0 / tv_0`, which puts the penalty
/// a fixed fraction below the data term at the start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TvWeight {
    Fixed(f64),
    Auto { factor: f64 },
}

/// Outer/inner split of the physics budget for the flow-guided method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SfmConfig {
    pub outer_steps: usize,
    pub inner_steps: usize,
}

impl SfmConfig {
    /// The normalized time grid s/(outer-1) needs at least two outer steps;
    /// the product must spend the physics budget exactly.
    pub fn validate(&self, total_physics_steps: usize) -> Result<()> {
        if self.outer_steps < 2 {
            return Err(InvertError::invalid(format!(
                "outer step count must be at least 2, got {}",
                self.outer_steps
            )));
        }
        if self.inner_steps == 0 {
            return Err(InvertError::invalid("inner step count must be at least 1"));
        }
        if self.outer_steps * self.inner_steps != total_physics_steps {
            return Err(InvertError::invalid(format!(
                "outer x inner = {}x{} = {} does not equal the physics budget {}",
                self.outer_steps,
                self.inner_steps,
                self.outer_steps * self.inner_steps,
                total_physics_steps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct InversionConfig {
    pub method: Method,
    /// Exact number of forward+adjoint evaluations the run may spend.
    pub total_physics_steps: usize,
    pub lr_model: f64,
    pub lr_net: f64,
    pub lambda_tv: TvWeight,
    pub bounds: Bounds,
    pub seed: u64,
    /// Convergence rows and snapshots are taken every this many physics
    /// steps (the first and last step are always recorded).
    pub record_every: usize,
    /// Network-only fitting steps before the physics loop (no physics
    /// evaluations are spent).
    pub warm_start_steps: usize,
    pub net: NetConfig,
    pub sfm: Option<SfmConfig>,
    /// Take the target update from the last inner proposal instead of
    /// re-applying the flow after the final weight update of the sweep.
    pub reuse_last_proposal: bool,
    /// Smoothing floor of the total-variation penalty, in m/s.
    pub tv_eps: f64,
}

impl InversionConfig {
    pub fn new(method: Method, total_physics_steps: usize, bounds: Bounds) -> Self {
        InversionConfig {
            method,
            total_physics_steps,
            lr_model: 2.0e-4,
            lr_net: 2.0e-4,
            lambda_tv: TvWeight::Auto { factor: 1.0e-2 },
            bounds,
            seed: 0,
            record_every: 10,
            warm_start_steps: 200,
            net: NetConfig::default(),
            sfm: None,
            reuse_last_proposal: false,
            tv_eps: 1.0e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_physics_steps == 0 {
            return Err(InvertError::invalid("total_physics_steps must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(InvertError::invalid("record_every must be at least 1"));
        }
        for (name, lr) in [("lr_model", self.lr_model), ("lr_net", self.lr_net)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(InvertError::invalid(format!("{name} must be positive, got {lr}")));
            }
        }
        match self.lambda_tv {
            TvWeight::Fixed(l) if !(l >= 0.0 && l.is_finite()) => {
                return Err(InvertError::invalid(format!(
                    "fixed TV weight must be finite and non-negative, got {l}"
                )));
            }
            TvWeight::Auto { factor } if !(factor > 0.0 && factor.is_finite()) => {
                return Err(InvertError::invalid(format!(
                    "auto TV factor must be positive, got {factor}"
                )));
            }
            _ => {}
        }
        if !(self.tv_eps > 0.0 && self.tv_eps.is_finite()) {
            return Err(InvertError::invalid(format!(
                "tv_eps must be positive, got {}",
                self.tv_eps
            )));
        }
        self.net.validate()?;
        if self.method == Method::Sfm {
            let sfm = self.sfm.ok_or_else(|| {
                InvertError::invalid("the SFM method needs an outer/inner step split")
            })?;
            sfm.validate(self.total_physics_steps)?;
        }
        Ok(())
    }
}
