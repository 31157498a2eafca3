use sfwi_core::{Grid2D, VelocityModel};

use crate::stencil;
use crate::{Result, SolverError};

/// Spatial accuracy order of the Laplacian stencil. Fixed by the scheme.
pub const SPATIAL_ORDER: usize = 8;
/// Temporal accuracy order of the leapfrog update. Fixed by the scheme.
pub const TIME_ORDER: usize = 2;

/// Time-stepping and absorbing-boundary settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Time step in seconds. Must satisfy the CFL bound for the model.
    pub dt: f64,
    /// Number of time steps; traces have this many samples.
    pub nt: usize,
    /// Absorbing layer thickness in cells on each side, at least 8.
    pub pml_width: usize,
    /// Target boundary reflection coefficient of the damping profile.
    pub pml_reflection: f64,
    /// Reference velocity for the damping profile. Fixed in the config
    /// rather than taken from the model so the gradient of the misfit with
    /// respect to the model stays exact (the absorbing profile must not
    /// itself depend on the model values).
    pub pml_vref: f64,
    /// Fraction of the stability limit the time step may use, in (0, 1].
    pub cfl_safety: f64,
    /// Constant density in kg/m^3. Recorded for completeness; it cancels
    /// out of the constant-density pressure formulation.
    pub rho0: f64,
    /// Replay segment length for the gradient's reverse pass. `None`
    /// stores the full wavefield history.
    pub checkpoint_interval: Option<usize>,
    /// Upper bound on gradient history storage per shot, in bytes.
    pub max_history_bytes: usize,
}

impl SolverConfig {
    pub fn new(dt: f64, nt: usize, pml_vref: f64) -> Self {
        SolverConfig {
            dt,
            nt,
            pml_width: 10,
            pml_reflection: 1.0e-3,
            pml_vref,
            cfl_safety: 0.9,
            rho0: 1000.0,
            checkpoint_interval: None,
            max_history_bytes: 2 << 30,
        }
    }

    /// Largest stable time step for the given peak velocity, from the von
    /// Neumann bound of the 8th-order stencil scaled by `cfl_safety`.
    pub fn max_stable_dt(v_max: f64, grid: &Grid2D, cfl_safety: f64) -> f64 {
        let c2 = stencil::D2_ABS_SUM;
        let inv = 1.0 / (grid.dx * grid.dx) + 1.0 / (grid.dz * grid.dz);
        cfl_safety * 2.0 / (v_max * (c2 * inv).sqrt())
    }

    /// Check static settings plus the CFL bound against a model.
    pub fn validate(&self, model: &VelocityModel) -> Result<()> {
        if self.nt == 0 {
            return Err(SolverError::invalid("nt must be at least 1"));
        }
        if !(self.dt > 0.0) {
            return Err(SolverError::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.pml_width < 8 {
            return Err(SolverError::invalid(format!(
                "pml_width must be at least 8 cells, got {}",
                self.pml_width
            )));
        }
        if !(self.pml_reflection > 0.0 && self.pml_reflection < 1.0) {
            return Err(SolverError::invalid(format!(
                "pml_reflection must lie in (0, 1), got {}",
                self.pml_reflection
            )));
        }
        if !(self.pml_vref > 0.0) {
            return Err(SolverError::invalid(format!(
                "pml_vref must be positive, got {}",
                self.pml_vref
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(SolverError::invalid(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        if self.checkpoint_interval == Some(0) {
            return Err(SolverError::invalid("checkpoint_interval must be at least 1"));
        }
        if !(model.min_velocity() > 0.0) {
            return Err(SolverError::invalid(format!(
                "velocity model must be strictly positive, min is {}",
                model.min_velocity()
            )));
        }
        let v_max = model.max_velocity();
        let required = Self::max_stable_dt(v_max, model.grid(), self.cfl_safety);
        if self.dt > required {
            return Err(SolverError::Stability { dt: self.dt, v_max, required_dt: required });
        }
        Ok(())
    }

    /// Ghost frame plus absorbing layer: interior cell (0,0) sits at padded
    /// index (pad, pad).
    pub(crate) fn pad(&self) -> usize {
        self.pml_width + stencil::HALF_WIDTH
    }
}
