//! Turns a configuration into concrete experiment inputs: truth model,
//! starting model, acquisition, wavelet, and observed data.

use std::path::Path;

use sfwi_core::{
    gaussian_smooth, linear_gradient_model, load_field, make_ricker, AcquisitionGeometry,
    Grid2D, RickerWavelet, ShotGather, VelocityModel,
};
use sfwi_solver::{add_gaussian_noise, simulate_shots, subsample_shots, SolverConfig};

use crate::config::{ExperimentConfig, InitKind, ScenarioName};
use crate::{CliError, Result};

/// Everything a run needs, fully materialized.
#[derive(Debug)]
pub struct Assembled {
    pub truth: VelocityModel,
    pub initial: VelocityModel,
    pub geometry: AcquisitionGeometry,
    pub wavelet: RickerWavelet,
    pub solver: SolverConfig,
    pub d_obs: ShotGather,
    /// The pre-noise gather, kept only for the noisy scenario.
    pub d_clean: Option<ShotGather>,
}

pub fn assemble(cfg: &ExperimentConfig) -> Result<Assembled> {
    let grid = Grid2D::new(cfg.grid.nx, cfg.grid.nz, cfg.grid.dx, cfg.grid.dz)?;
    let truth = load_or_generate_truth(cfg, grid)?;
    let solver = cfg.solver_config();
    check_time_step(cfg, &solver, &truth)?;

    let sources = AcquisitionGeometry::surface_line(
        &grid,
        cfg.acquisition.n_shots,
        cfg.acquisition.source_depth,
    )?;
    let receivers = AcquisitionGeometry::surface_line(
        &grid,
        cfg.acquisition.n_receivers,
        cfg.acquisition.receiver_depth,
    )?;
    let mut geometry = AcquisitionGeometry::new(&grid, sources, receivers)?;
    if cfg.scenario.name == ScenarioName::SparseShots {
        geometry = subsample_shots(&geometry, cfg.scenario.n_keep_shots)?;
    }

    let wavelet = make_ricker(cfg.acquisition.f0, solver.dt, solver.nt, None)?;
    let clean = simulate_shots(&truth, &geometry, &wavelet, &solver)?;
    let (d_obs, d_clean) = if cfg.scenario.name == ScenarioName::Noisy {
        let noisy = add_gaussian_noise(&clean, cfg.scenario.snr_db, cfg.scenario.noise_seed)?;
        (noisy, Some(clean))
    } else {
        (clean, None)
    };

    let initial = build_initial(cfg, &truth)?;
    Ok(Assembled { truth, initial, geometry, wavelet, solver, d_obs, d_clean })
}

fn load_or_generate_truth(cfg: &ExperimentConfig, grid: Grid2D) -> Result<VelocityModel> {
    match &cfg.scenario.truth_path {
        Some(path) => load_truth(path, grid),
        None => {
            let kind: crate::bench::BenchmarkKind = cfg.scenario.benchmark.parse()?;
            crate::bench::generate_synthetic_benchmark(kind, grid, cfg.scenario.benchmark_seed)
        }
    }
}

fn load_truth(path: &Path, grid: Grid2D) -> Result<VelocityModel> {
    let truth = load_field(path)?;
    if *truth.grid() != grid {
        return Err(CliError::config_one(format!(
            "scenario.truth_path: {} holds a {}x{} field but the grid section says {}x{}",
            path.display(),
            truth.grid().nx,
            truth.grid().nz,
            grid.nx,
            grid.nz
        )));
    }
    Ok(truth)
}

/// The run must stay stable for any model inside the velocity box, not just
/// the truth, because raw network proposals roam the whole box.
fn check_time_step(
    cfg: &ExperimentConfig,
    solver: &SolverConfig,
    truth: &VelocityModel,
) -> Result<()> {
    solver.validate(truth)?;
    if let Some(v_max) = cfg.method.bounds_max {
        let dt_max = SolverConfig::max_stable_dt(v_max, truth.grid(), solver.cfl_safety);
        if solver.dt > dt_max {
            return Err(CliError::config_one(format!(
                "solver.dt: {} exceeds the stability limit {dt_max:.6e} for \
                 method.bounds_max = {v_max}; lower dt or the velocity ceiling",
                solver.dt
            )));
        }
    }
    Ok(())
}

fn build_initial(cfg: &ExperimentConfig, truth: &VelocityModel) -> Result<VelocityModel> {
    match cfg.init_kind() {
        InitKind::Smoothed => Ok(gaussian_smooth(truth, cfg.scenario.smooth_sigma)?),
        InitKind::Linear => {
            let top = cfg.scenario.linear_v_top.unwrap_or_else(|| truth.min_velocity());
            let bottom = cfg.scenario.linear_v_bottom.unwrap_or_else(|| truth.max_velocity());
            Ok(linear_gradient_model(*truth.grid(), top, bottom)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MethodName;
    use sfwi_invert::Method;

    fn small_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.grid.nx = 32;
        cfg.grid.nz = 32;
        cfg.acquisition.n_shots = 2;
        cfg.acquisition.n_receivers = 8;
        cfg.solver.nt = 120;
        cfg.solver.dt = 1.0e-3;
        cfg.method.bounds_max = Some(2600.0);
        cfg
    }

    #[test]
    fn clean_scenario_has_no_clean_copy() {
        let asm = assemble(&small_config()).unwrap();
        assert!(asm.d_clean.is_none());
        assert_eq!(asm.d_obs.data.shape(), &[2, 8, 120]);
    }

    #[test]
    fn noisy_scenario_keeps_both_gathers() {
        let mut cfg = small_config();
        cfg.scenario.name = ScenarioName::Noisy;
        let asm = assemble(&cfg).unwrap();
        let clean = asm.d_clean.unwrap();
        assert_ne!(clean.data, asm.d_obs.data);
        assert_eq!(clean.data.shape(), asm.d_obs.data.shape());
    }

    #[test]
    fn sparse_scenario_cuts_the_source_count() {
        let mut cfg = small_config();
        cfg.acquisition.n_shots = 8;
        cfg.scenario.name = ScenarioName::SparseShots;
        cfg.scenario.n_keep_shots = 3;
        let asm = assemble(&cfg).unwrap();
        assert_eq!(asm.geometry.sources.len(), 3);
        assert_eq!(asm.d_obs.data.shape()[0], 3);
    }

    #[test]
    fn poor_init_defaults_to_a_linear_start() {
        let mut cfg = small_config();
        cfg.scenario.name = ScenarioName::PoorInit;
        let asm = assemble(&cfg).unwrap();
        let v = asm.initial.values();
        assert!(v[(31, 0)] > v[(0, 0)]);
        for ix in 1..32 {
            assert_eq!(v[(5, ix)], v[(5, 0)]);
        }
    }

    #[test]
    fn unstable_ceiling_is_rejected_before_any_simulation() {
        let mut cfg = small_config();
        cfg.method.bounds_max = Some(9000.0);
        let err = assemble(&cfg).unwrap_err();
        assert!(err.to_string().contains("bounds_max"), "{err}");
    }

    #[test]
    fn smoothed_start_is_between_the_truth_extremes() {
        let mut cfg = small_config();
        cfg.method.name = MethodName(Method::Fwi);
        let asm = assemble(&cfg).unwrap();
        let s = asm.initial.values().as_slice().unwrap();
        assert!(s.iter().all(|&v| (1500.0..=2500.0).contains(&v)));
    }
}
