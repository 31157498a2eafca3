//! Experiment configuration: a sectioned key/value file (TOML syntax) with
//! a fully defaulted schema. Parsing is two-pass so a bad file reports
//! every offending key at once instead of failing one key at a time.
//! `docs/config.md` documents each key with its default and unit.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sfwi_invert::{InversionConfig, Method, SfmConfig, TvWeight};
use sfwi_net::NetConfig;
use sfwi_optim::Bounds;
use sfwi_solver::SolverConfig;

use crate::bench::BenchmarkKind;
use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub acquisition: AcquisitionSection,
    pub solver: SolverSection,
    pub method: MethodSection,
    pub scenario: ScenarioSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSection {
    /// Lateral cell count.
    pub nx: usize,
    /// Depth cell count.
    pub nz: usize,
    /// Lateral spacing, m.
    pub dx: f64,
    /// Depth spacing, m.
    pub dz: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { nx: 64, nz: 64, dx: 10.0, dz: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcquisitionSection {
    /// Sources spread evenly across the surface.
    pub n_shots: usize,
    /// Receivers spread evenly across the surface, shared by every shot.
    pub n_receivers: usize,
    /// Source depth, cells.
    pub source_depth: usize,
    /// Receiver depth, cells.
    pub receiver_depth: usize,
    /// Ricker dominant frequency, Hz.
    pub f0: f64,
}

impl Default for AcquisitionSection {
    fn default() -> Self {
        AcquisitionSection {
            n_shots: 4,
            n_receivers: 32,
            source_depth: 2,
            receiver_depth: 4,
            f0: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSection {
    /// Time step, s. Must satisfy the CFL bound for every velocity the run
    /// can reach (checked against method.bounds_max before running).
    pub dt: f64,
    /// Trace length, samples.
    pub nt: usize,
    /// Absorbing layer thickness per side, cells (minimum 8).
    pub pml_width: usize,
    /// Target boundary reflection coefficient of the damping profile.
    pub pml_reflection: f64,
    /// Damping profile reference velocity, m/s.
    pub pml_vref: f64,
    /// Fraction of the stability limit the time step may use, in (0, 1].
    pub cfl_safety: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            dt: 1.0e-3,
            nt: 800,
            pml_width: 10,
            pml_reflection: 1.0e-3,
            pml_vref: 2800.0,
            cfl_safety: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodSection {
    /// One of fwi, fwi_tv, dip, sfm.
    pub name: MethodName,
    /// Shared physics budget: every method runs exactly this many misfit
    /// evaluations.
    pub total_physics_steps: usize,
    /// AdamW step size for pixel-space updates, m/s.
    pub lr_model: f64,
    /// AdamW step size for network weights.
    pub lr_net: f64,
    /// Fixed TV weight. Mutually exclusive with lambda_tv_auto_factor.
    pub lambda_tv: Option<f64>,
    /// Auto TV weight: lambda = factor * misfit_0 / TV_0. Default 0.01
    /// when method is fwi_tv and neither key is set.
    pub lambda_tv_auto_factor: Option<f64>,
    /// Smoothing floor inside the TV magnitude, m/s per cell.
    pub tv_eps: f64,
    /// Velocity box: emitted models are clamped into [bounds_min, bounds_max].
    pub bounds_min: f64,
    pub bounds_max: Option<f64>,
    /// Master seed for network initialization.
    pub seed: u64,
    /// Convergence rows are recorded every this many physics steps (the
    /// first and last step are always recorded).
    pub record_every: usize,
    /// Network pre-fit steps before the physics loop (dip and sfm only).
    pub warm_start_steps: usize,
    /// Interpolation sweeps (sfm only); outer_steps * inner_steps must
    /// equal total_physics_steps.
    pub outer_steps: usize,
    /// Weight updates per sweep (sfm only).
    pub inner_steps: usize,
    /// Carry the last proposal of a sweep forward instead of recomputing
    /// it with the updated weights (sfm only).
    pub reuse_last_proposal: bool,
    /// Network width at full resolution.
    pub base_channels: usize,
    /// Channel multiplier per resolution level; the grid must be divisible
    /// by 2^(levels - 1).
    pub channel_mults: Vec<usize>,
    /// Residual blocks per level.
    pub blocks_per_level: usize,
    /// Normalization groups per layer.
    pub groups: usize,
    /// Scale applied to the interpolation time before the sinusoidal
    /// embedding.
    pub time_multiplier: f64,
}

impl Default for MethodSection {
    fn default() -> Self {
        MethodSection {
            name: MethodName(Method::Fwi),
            total_physics_steps: 300,
            lr_model: 4.0,
            lr_net: 1.0e-3,
            lambda_tv: None,
            lambda_tv_auto_factor: None,
            tv_eps: 1.0e-3,
            bounds_min: 1400.0,
            bounds_max: Some(4800.0),
            seed: 0,
            record_every: 10,
            warm_start_steps: 200,
            outer_steps: 30,
            inner_steps: 10,
            reuse_last_proposal: false,
            base_channels: 16,
            channel_mults: vec![1, 2, 2],
            blocks_per_level: 2,
            groups: 8,
            time_multiplier: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSection {
    /// One of clean, poor_init, noisy, sparse_shots. Exactly one is active
    /// per run.
    pub name: ScenarioName,
    /// Truth model generator kind (see gen-model). Ignored when truth_path
    /// is set.
    pub benchmark: String,
    /// Seed for the truth generator.
    pub benchmark_seed: u64,
    /// Load the truth model from this field file instead of generating it.
    pub truth_path: Option<PathBuf>,
    /// Signal-to-noise ratio of the observed data, dB (noisy only).
    pub snr_db: f64,
    /// Seed of the additive noise stream (noisy only).
    pub noise_seed: u64,
    /// Sources kept by uniform decimation (sparse_shots only).
    pub n_keep_shots: usize,
    /// Starting model construction; defaults to linear for poor_init and
    /// smoothed otherwise.
    pub init_kind: Option<InitKind>,
    /// Gaussian smoothing radius of the smoothed start, cells.
    pub smooth_sigma: f64,
    /// Linear start endpoints, m/s; default to the truth's min and max.
    pub linear_v_top: Option<f64>,
    pub linear_v_bottom: Option<f64>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            name: ScenarioName::Clean,
            benchmark: "two_layer".to_string(),
            benchmark_seed: 0,
            truth_path: None,
            snr_db: 3.5,
            noise_seed: 1,
            n_keep_shots: 5,
            init_kind: None,
            smooth_sigma: 8.0,
            linear_v_top: None,
            linear_v_bottom: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    /// Output directory; may instead come from --out.
    pub dir: Option<PathBuf>,
    /// Write model snapshots alongside the convergence record.
    pub snapshots: bool,
    /// Blank the wall-clock column of convergence.csv so re-runs compare
    /// bit-identically. Set by --deterministic.
    pub zero_seconds: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: None, snapshots: true, zero_seconds: false }
    }
}

/// Method selector with lowercase names on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodName(pub Method);

impl MethodName {
    pub fn as_str(&self) -> &'static str {
        match self.0 {
            Method::Fwi => "fwi",
            Method::FwiTv => "fwi_tv",
            Method::Dip => "dip",
            Method::Sfm => "sfm",
        }
    }
}

impl FromStr for MethodName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fwi" => Ok(MethodName(Method::Fwi)),
            "fwi_tv" => Ok(MethodName(Method::FwiTv)),
            "dip" => Ok(MethodName(Method::Dip)),
            "sfm" => Ok(MethodName(Method::Sfm)),
            other => Err(format!("unknown method '{other}' (known: fwi, fwi_tv, dip, sfm)")),
        }
    }
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioName {
    Clean,
    PoorInit,
    Noisy,
    SparseShots,
}

impl ScenarioName {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::Clean => "clean",
            ScenarioName::PoorInit => "poor_init",
            ScenarioName::Noisy => "noisy",
            ScenarioName::SparseShots => "sparse_shots",
        }
    }
}

impl FromStr for ScenarioName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "clean" => Ok(ScenarioName::Clean),
            "poor_init" => Ok(ScenarioName::PoorInit),
            "noisy" => Ok(ScenarioName::Noisy),
            "sparse_shots" => Ok(ScenarioName::SparseShots),
            other => Err(format!(
                "unknown scenario '{other}' (known: clean, poor_init, noisy, sparse_shots)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Smoothed,
    Linear,
}

impl InitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitKind::Smoothed => "smoothed",
            InitKind::Linear => "linear",
        }
    }
}

impl FromStr for InitKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "smoothed" => Ok(InitKind::Smoothed),
            "linear" => Ok(InitKind::Linear),
            other => Err(format!("unknown init kind '{other}' (known: smoothed, linear)")),
        }
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let raw = String::deserialize(d)?;
                raw.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(MethodName);
string_serde!(ScenarioName);
string_serde!(InitKind);

/// Known keys per section; anything else in the file is rejected by name.
const SECTIONS: [(&str, &[&str]); 6] = [
    ("grid", &["nx", "nz", "dx", "dz"]),
    ("acquisition", &["n_shots", "n_receivers", "source_depth", "receiver_depth", "f0"]),
    ("solver", &["dt", "nt", "pml_width", "pml_reflection", "pml_vref", "cfl_safety"]),
    (
        "method",
        &[
            "name",
            "total_physics_steps",
            "lr_model",
            "lr_net",
            "lambda_tv",
            "lambda_tv_auto_factor",
            "tv_eps",
            "bounds_min",
            "bounds_max",
            "seed",
            "record_every",
            "warm_start_steps",
            "outer_steps",
            "inner_steps",
            "reuse_last_proposal",
            "base_channels",
            "channel_mults",
            "blocks_per_level",
            "groups",
            "time_multiplier",
        ],
    ),
    (
        "scenario",
        &[
            "name",
            "benchmark",
            "benchmark_seed",
            "truth_path",
            "snr_db",
            "noise_seed",
            "n_keep_shots",
            "init_kind",
            "smooth_sigma",
            "linear_v_top",
            "linear_v_bottom",
        ],
    ),
    ("output", &["dir", "snapshots", "zero_seconds"]),
];

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let value: toml::Value = text
        .parse()
        .map_err(|e| CliError::config(vec![format!("syntax: {e}")]))?;

    let mut errors = unknown_key_errors(&value);
    match value.try_into::<ExperimentConfig>() {
        Ok(cfg) => {
            errors.extend(cfg.validate_collect());
            if errors.is_empty() {
                Ok(cfg)
            } else {
                Err(CliError::config(errors))
            }
        }
        Err(e) => {
            errors.push(e.to_string().trim().to_string());
            Err(CliError::config(errors))
        }
    }
}

fn unknown_key_errors(value: &toml::Value) -> Vec<String> {
    let mut errors = Vec::new();
    let Some(table) = value.as_table() else {
        return vec!["top level must be a table of sections".to_string()];
    };
    for (section, sub) in table {
        let Some(known) = SECTIONS.iter().find(|(name, _)| name == section) else {
            errors.push(format!(
                "unknown section [{section}] (known: {})",
                SECTIONS.map(|(n, _)| n).join(", ")
            ));
            continue;
        };
        let Some(sub) = sub.as_table() else {
            errors.push(format!("[{section}] must be a section, not a value"));
            continue;
        };
        for key in sub.keys() {
            if !known.1.contains(&key.as_str()) {
                errors.push(format!("{section}.{key}: unknown key"));
            }
        }
    }
    errors
}

impl ExperimentConfig {
    /// The resolved configuration with every default materialized; parsing
    /// the echo reproduces this value exactly.
    pub fn to_echo_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// All semantic problems at once, one message per key.
    pub fn validate_collect(&self) -> Vec<String> {
        let mut e = Vec::new();
        let g = &self.grid;
        if g.nx < 8 || g.nz < 8 {
            e.push(format!("grid.nx/grid.nz: must be at least 8, got {}x{}", g.nx, g.nz));
        }
        if !(g.dx > 0.0 && g.dx.is_finite()) {
            e.push(format!("grid.dx: must be positive, got {}", g.dx));
        }
        if !(g.dz > 0.0 && g.dz.is_finite()) {
            e.push(format!("grid.dz: must be positive, got {}", g.dz));
        }

        let a = &self.acquisition;
        if a.n_shots == 0 {
            e.push("acquisition.n_shots: must be at least 1".to_string());
        }
        if a.n_shots > g.nx {
            e.push(format!(
                "acquisition.n_shots: {} does not fit on {} columns",
                a.n_shots, g.nx
            ));
        }
        if a.n_receivers == 0 {
            e.push("acquisition.n_receivers: must be at least 1".to_string());
        }
        if a.n_receivers > g.nx {
            e.push(format!(
                "acquisition.n_receivers: {} does not fit on {} columns",
                a.n_receivers, g.nx
            ));
        }
        if a.source_depth >= g.nz {
            e.push(format!(
                "acquisition.source_depth: {} outside grid nz = {}",
                a.source_depth, g.nz
            ));
        }
        if a.receiver_depth >= g.nz {
            e.push(format!(
                "acquisition.receiver_depth: {} outside grid nz = {}",
                a.receiver_depth, g.nz
            ));
        }
        if !(a.f0 > 0.0 && a.f0.is_finite()) {
            e.push(format!("acquisition.f0: must be positive, got {}", a.f0));
        }

        let s = &self.solver;
        if !(s.dt > 0.0 && s.dt.is_finite()) {
            e.push(format!("solver.dt: must be positive, got {}", s.dt));
        }
        if s.nt == 0 {
            e.push("solver.nt: must be at least 1".to_string());
        }
        if s.pml_width < 8 {
            e.push(format!("solver.pml_width: must be at least 8, got {}", s.pml_width));
        }
        if !(s.pml_reflection > 0.0 && s.pml_reflection < 1.0) {
            e.push(format!(
                "solver.pml_reflection: must lie in (0, 1), got {}",
                s.pml_reflection
            ));
        }
        if !(s.pml_vref > 0.0) {
            e.push(format!("solver.pml_vref: must be positive, got {}", s.pml_vref));
        }
        if !(s.cfl_safety > 0.0 && s.cfl_safety <= 1.0) {
            e.push(format!("solver.cfl_safety: must lie in (0, 1], got {}", s.cfl_safety));
        }

        let m = &self.method;
        if m.total_physics_steps == 0 {
            e.push("method.total_physics_steps: must be at least 1".to_string());
        }
        if !(m.lr_model > 0.0) {
            e.push(format!("method.lr_model: must be positive, got {}", m.lr_model));
        }
        if !(m.lr_net > 0.0) {
            e.push(format!("method.lr_net: must be positive, got {}", m.lr_net));
        }
        if m.lambda_tv.is_some() && m.lambda_tv_auto_factor.is_some() {
            e.push(
                "method.lambda_tv and method.lambda_tv_auto_factor are mutually exclusive"
                    .to_string(),
            );
        }
        if let Some(l) = m.lambda_tv {
            if !(l >= 0.0 && l.is_finite()) {
                e.push(format!("method.lambda_tv: must be finite and >= 0, got {l}"));
            }
        }
        if let Some(f) = m.lambda_tv_auto_factor {
            if !(f > 0.0 && f.is_finite()) {
                e.push(format!("method.lambda_tv_auto_factor: must be positive, got {f}"));
            }
        }
        if !(m.tv_eps > 0.0) {
            e.push(format!("method.tv_eps: must be positive, got {}", m.tv_eps));
        }
        if !(m.bounds_min > 0.0) {
            e.push(format!("method.bounds_min: must be positive, got {}", m.bounds_min));
        }
        if let Some(hi) = m.bounds_max {
            if !(hi > m.bounds_min) {
                e.push(format!(
                    "method.bounds_max: {hi} must exceed bounds_min = {}",
                    m.bounds_min
                ));
            }
        }
        if m.record_every == 0 {
            e.push("method.record_every: must be at least 1".to_string());
        }
        if m.name.0 == Method::Sfm {
            if m.outer_steps < 2 {
                e.push(format!("method.outer_steps: must be at least 2, got {}", m.outer_steps));
            }
            if m.inner_steps == 0 {
                e.push("method.inner_steps: must be at least 1".to_string());
            }
            if m.outer_steps >= 2
                && m.inner_steps >= 1
                && m.outer_steps * m.inner_steps != m.total_physics_steps
            {
                e.push(format!(
                    "method.outer_steps x method.inner_steps = {}x{} = {} does not equal \
                     method.total_physics_steps = {}",
                    m.outer_steps,
                    m.inner_steps,
                    m.outer_steps * m.inner_steps,
                    m.total_physics_steps
                ));
            }
        }
        if matches!(m.name.0, Method::Dip | Method::Sfm) {
            match self.net_config().validate() {
                Ok(()) => {
                    let divisor = self.net_config().spatial_divisor();
                    if g.nx % divisor != 0 || g.nz % divisor != 0 {
                        e.push(format!(
                            "method.channel_mults: {} levels need the grid divisible by \
                             {divisor}, got {}x{}",
                            m.channel_mults.len(),
                            g.nx,
                            g.nz
                        ));
                    }
                }
                Err(err) => e.push(format!("method: network architecture invalid: {err}")),
            }
        }

        let sc = &self.scenario;
        if sc.truth_path.is_none() {
            if let Err(err) = sc.benchmark.parse::<BenchmarkKind>() {
                e.push(format!("scenario.benchmark: {err}"));
            }
        }
        if !sc.snr_db.is_finite() {
            e.push(format!("scenario.snr_db: must be finite, got {}", sc.snr_db));
        }
        if sc.n_keep_shots == 0 {
            e.push("scenario.n_keep_shots: must be at least 1".to_string());
        }
        if sc.name == ScenarioName::SparseShots && sc.n_keep_shots > a.n_shots {
            e.push(format!(
                "scenario.n_keep_shots: {} exceeds acquisition.n_shots = {}",
                sc.n_keep_shots, a.n_shots
            ));
        }
        if !(sc.smooth_sigma >= 0.0 && sc.smooth_sigma.is_finite()) {
            e.push(format!("scenario.smooth_sigma: must be >= 0, got {}", sc.smooth_sigma));
        }
        for (key, v) in [("linear_v_top", sc.linear_v_top), ("linear_v_bottom", sc.linear_v_bottom)]
        {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    e.push(format!("scenario.{key}: must be positive, got {v}"));
                }
            }
        }
        e
    }

    pub fn net_config(&self) -> NetConfig {
        let m = &self.method;
        NetConfig {
            base_channels: m.base_channels,
            channel_mults: m.channel_mults.clone(),
            blocks_per_level: m.blocks_per_level,
            groups: m.groups,
            time_multiplier: m.time_multiplier,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            pml_width: s.pml_width,
            pml_reflection: s.pml_reflection,
            cfl_safety: s.cfl_safety,
            ..SolverConfig::new(s.dt, s.nt, s.pml_vref)
        }
    }

    /// The driver-facing configuration. Assumes validate_collect passed.
    pub fn inversion_config(&self) -> Result<InversionConfig> {
        let m = &self.method;
        let bounds = Bounds::new(m.bounds_min, m.bounds_max)
            .map_err(|e| CliError::config_one(format!("method bounds: {e}")))?;
        let mut cfg = InversionConfig::new(m.name.0, m.total_physics_steps, bounds);
        cfg.lr_model = m.lr_model;
        cfg.lr_net = m.lr_net;
        cfg.lambda_tv = match (m.lambda_tv, m.lambda_tv_auto_factor) {
            (Some(l), None) => TvWeight::Fixed(l),
            (None, Some(f)) => TvWeight::Auto { factor: f },
            (None, None) => TvWeight::Auto { factor: 0.01 },
            (Some(_), Some(_)) => {
                return Err(CliError::config_one(
                    "method.lambda_tv and method.lambda_tv_auto_factor are mutually exclusive",
                ))
            }
        };
        cfg.tv_eps = m.tv_eps;
        cfg.seed = m.seed;
        cfg.record_every = m.record_every;
        cfg.warm_start_steps = m.warm_start_steps;
        cfg.net = self.net_config();
        cfg.reuse_last_proposal = m.reuse_last_proposal;
        cfg.sfm = if m.name.0 == Method::Sfm {
            Some(SfmConfig { outer_steps: m.outer_steps, inner_steps: m.inner_steps })
        } else {
            None
        };
        Ok(cfg)
    }

    /// Starting model construction for the active scenario.
    pub fn init_kind(&self) -> InitKind {
        self.scenario.init_kind.unwrap_or(match self.scenario.name {
            ScenarioName::PoorInit => InitKind::Linear,
            _ => InitKind::Smoothed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default_config() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn echo_round_trips_exactly() {
        let mut cfg = ExperimentConfig::default();
        cfg.method.name = MethodName(Method::Sfm);
        cfg.method.lambda_tv = Some(0.5);
        cfg.scenario.name = ScenarioName::Noisy;
        cfg.scenario.truth_path = Some(PathBuf::from("t.sfwi"));
        cfg.output.dir = Some(PathBuf::from("out"));
        let echo = cfg.to_echo_string();
        let back = parse_config(&echo).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn every_offending_key_is_reported() {
        let text = "
[grid]
nx = 4
dx = -1.0
typo_key = 3

[method]
record_every = 0
lr_model = 0.0

[nonsense]
a = 1
";
        let err = parse_config(text).unwrap_err();
        let msg = err.to_string();
        for needle in [
            "grid.nx",
            "grid.dx",
            "grid.typo_key",
            "method.record_every",
            "method.lr_model",
            "unknown section [nonsense]",
        ] {
            assert!(msg.contains(needle), "missing '{needle}' in:\n{msg}");
        }
    }

    #[test]
    fn sfm_budget_product_is_checked() {
        let text = "
[method]
name = \"sfm\"
total_physics_steps = 100
outer_steps = 7
inner_steps = 6
";
        let msg = parse_config(text).unwrap_err().to_string();
        assert!(msg.contains("7x6"), "{msg}");
        assert!(msg.contains("100"), "{msg}");
    }

    #[test]
    fn exclusive_tv_keys_are_rejected() {
        let text = "
[method]
name = \"fwi_tv\"
lambda_tv = 0.5
lambda_tv_auto_factor = 0.1
";
        let msg = parse_config(text).unwrap_err().to_string();
        assert!(msg.contains("mutually exclusive"), "{msg}");
    }

    #[test]
    fn method_names_are_case_insensitive() {
        let cfg = parse_config("[method]\nname = \"FWI_TV\"\n").unwrap();
        assert_eq!(cfg.method.name.0, Method::FwiTv);
    }

    #[test]
    fn grid_divisibility_is_enforced_for_network_methods() {
        let text = "
[grid]
nx = 42
nz = 42

[method]
name = \"sfm\"
total_physics_steps = 300
";
        let msg = parse_config(text).unwrap_err().to_string();
        assert!(msg.contains("divisible"), "{msg}");
    }

    #[test]
    fn default_tv_weight_is_automatic() {
        let mut cfg = ExperimentConfig::default();
        cfg.method.name = MethodName(Method::FwiTv);
        let inv = cfg.inversion_config().unwrap();
        assert_eq!(inv.lambda_tv, TvWeight::Auto { factor: 0.01 });
    }

    #[test]
    fn sparse_keep_count_checked_against_shots() {
        let text = "
[scenario]
name = \"sparse_shots\"
n_keep_shots = 9
";
        let msg = parse_config(text).unwrap_err().to_string();
        assert!(msg.contains("n_keep_shots"), "{msg}");
    }
}
