use sfwi_cli::{ExperimentConfig, MethodName};
use sfwi_invert::Method;

/// Small, fast experiment: 16x16 two-layer truth, 2 shots, 6 physics steps.
pub fn tiny_config(method: Method) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.grid.nx = 16;
    cfg.grid.nz = 16;
    cfg.acquisition.n_shots = 2;
    cfg.acquisition.n_receivers = 8;
    cfg.acquisition.f0 = 12.0;
    cfg.solver.nt = 160;
    cfg.solver.pml_vref = 2100.0;
    cfg.method.name = MethodName(method);
    cfg.method.total_physics_steps = 6;
    cfg.method.record_every = 2;
    cfg.method.bounds_max = Some(2600.0);
    cfg.method.lr_model = 2.0;
    cfg.method.warm_start_steps = 10;
    cfg.method.base_channels = 8;
    cfg.method.channel_mults = vec![1, 2];
    cfg.method.blocks_per_level = 1;
    cfg.method.groups = 4;
    cfg.method.outer_steps = 2;
    cfg.method.inner_steps = 3;
    cfg
}
