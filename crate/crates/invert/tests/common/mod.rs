//! Small shared fixture: a 24x24 two-layer medium with one shot recorded
//! at the surface, cheap enough for every driver to run a handful of steps.

use ndarray::Array2;
use sfwi_core::{
    gaussian_smooth, make_ricker, AcquisitionGeometry, Grid2D, RickerWavelet, ShotGather,
    VelocityModel,
};
use sfwi_invert::{InversionConfig, InversionProblem, Method, SfmConfig};
use sfwi_net::NetConfig;
use sfwi_optim::Bounds;
use sfwi_solver::{simulate_shots, SolverConfig};

pub struct Fixture {
    pub truth: VelocityModel,
    pub model0: VelocityModel,
    pub geom: AcquisitionGeometry,
    pub wavelet: RickerWavelet,
    pub d_obs: ShotGather,
    pub solver: SolverConfig,
}

impl Fixture {
    pub fn problem(&self) -> InversionProblem<'_> {
        InversionProblem {
            model0: &self.model0,
            geom: &self.geom,
            wavelet: &self.wavelet,
            d_obs: &self.d_obs,
            solver: &self.solver,
            truth: Some(&self.truth),
        }
    }
}

pub fn two_layer_fixture() -> Fixture {
    let grid = Grid2D::new(24, 24, 10.0, 10.0).unwrap();
    let values = Array2::from_shape_fn((24, 24), |(iz, _)| if iz < 12 { 1600.0 } else { 2000.0 });
    let truth = VelocityModel::new(grid, values).unwrap();
    let model0 = gaussian_smooth(&truth, 5.0).unwrap();

    let sources = vec![(12, 2)];
    let receivers: Vec<(usize, usize)> = (3..22).step_by(3).map(|ix| (ix, 3)).collect();
    let geom = AcquisitionGeometry::new(&grid, sources, receivers).unwrap();

    let solver = SolverConfig::new(1.0e-3, 220, 2100.0);
    let wavelet = make_ricker(14.0, solver.dt, solver.nt, None).unwrap();
    let d_obs = simulate_shots(&truth, &geom, &wavelet, &solver).unwrap();

    Fixture { truth, model0, geom, wavelet, d_obs, solver }
}

/// Baseline run configuration against the fixture: tiny network, no warm
/// start, every step recorded.
pub fn base_config(method: Method, total: usize) -> InversionConfig {
    let mut cfg = InversionConfig::new(method, total, Bounds::new(1400.0, Some(2400.0)).unwrap());
    cfg.record_every = 2;
    cfg.warm_start_steps = 0;
    cfg.lr_model = 2.0;
    cfg.lr_net = 1.0e-3;
    cfg.net = NetConfig {
        base_channels: 8,
        channel_mults: vec![1, 2],
        blocks_per_level: 1,
        groups: 4,
        time_multiplier: 1000.0,
    };
    if method == Method::Sfm {
        cfg.sfm = Some(SfmConfig { outer_steps: 2, inner_steps: total / 2 });
    }
    cfg
}
