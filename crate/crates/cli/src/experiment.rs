//! Runs one experiment end to end and lays out its output directory:
//!
//! ```text
//! out/
//!   config.echo       resolved configuration, written first
//!   truth.sfwi        the model every metric compares against
//!   initial.sfwi      starting model
//!   gathers/
//!     observed.sgth   the data the inversion fits
//!     clean.sgth      pre-noise data (noisy scenario only)
//!   convergence.csv   one row per recorded physics step
//!   snaps/            model snapshots at the recorded steps
//!   final.sfwi        the emitted result
//!   manifest.toml     written last; its absence marks a partial run
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use sfwi_core::{save_field, save_gather};
use sfwi_invert::{
    ablation_grid, run_conventional_fwi, run_dip_fwi, run_sfm_fwi, run_tv_fwi, write_ablation_csv,
    InversionConfig, InversionOutput, InversionProblem, Method,
};

use crate::config::ExperimentConfig;
use crate::manifest::{sha256_of_file, RunManifest, Stopwatch, MANIFEST_NAME};
use crate::scenario::{assemble, Assembled};
use crate::{CliError, Result};

/// Command-line overrides applied on top of the configuration file. The
/// echo reflects them, so re-running from the echo needs no flags.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub deterministic: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(seed) = self.seed {
            cfg.method.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = Some(out.clone());
        }
        if self.deterministic {
            cfg.output.zero_seconds = true;
        }
    }
}

pub struct RunSummary {
    pub dir: PathBuf,
    pub config: ExperimentConfig,
    pub output: InversionOutput,
}

pub fn dispatch(
    cfg: &InversionConfig,
    prob: &InversionProblem,
) -> sfwi_invert::Result<InversionOutput> {
    match cfg.method {
        Method::Fwi => run_conventional_fwi(cfg, prob),
        Method::FwiTv => run_tv_fwi(cfg, prob),
        Method::Dip => run_dip_fwi(cfg, prob),
        Method::Sfm => run_sfm_fwi(cfg, prob),
    }
}

pub fn run_experiment(base: &ExperimentConfig, overrides: &Overrides) -> Result<RunSummary> {
    let (cfg, dir) = prepare(base, overrides)?;
    let clock = Stopwatch::start();
    let asm = write_inputs(&cfg, &dir)?;

    let inv_cfg = cfg.inversion_config()?;
    let prob = InversionProblem {
        model0: &asm.initial,
        geom: &asm.geometry,
        wavelet: &asm.wavelet,
        d_obs: &asm.d_obs,
        solver: &asm.solver,
        truth: Some(&asm.truth),
    };
    let output = dispatch(&inv_cfg, &prob)?;

    let csv = output.record.to_csv_string(cfg.output.zero_seconds);
    write_text(&dir.join("convergence.csv"), &csv)?;
    if cfg.output.snapshots {
        let snaps = dir.join("snaps");
        for (step, model) in &output.snapshots {
            save_field(&snaps.join(format!("snap_{step:06}.sfwi")), model)?;
        }
    }
    save_field(&dir.join("final.sfwi"), &output.final_model)?;

    write_manifest(&cfg, &dir, &clock, output.physics_evaluations, output.resolved_lambda)?;
    Ok(RunSummary { dir, config: cfg, output })
}

/// Simulation only: writes the inputs and a manifest, runs no inversion.
pub fn run_forward(base: &ExperimentConfig, overrides: &Overrides) -> Result<PathBuf> {
    let (cfg, dir) = prepare(base, overrides)?;
    let clock = Stopwatch::start();
    write_inputs(&cfg, &dir)?;
    write_manifest(&cfg, &dir, &clock, 0, None)?;
    Ok(dir)
}

/// One flow-guided run per outer/inner split, all spending the same budget
/// on the same data; results land in `ablation.csv`.
pub fn run_ablation(
    base: &ExperimentConfig,
    pairs: &[(usize, usize)],
    overrides: &Overrides,
) -> Result<PathBuf> {
    let mut cfg = base.clone();
    cfg.method.name = crate::config::MethodName(Method::Sfm);
    if let Some(&(outer, inner)) = pairs.first() {
        cfg.method.outer_steps = outer;
        cfg.method.inner_steps = inner;
    }
    let (cfg, dir) = prepare(&cfg, overrides)?;
    let clock = Stopwatch::start();
    let asm = write_inputs(&cfg, &dir)?;

    let inv_cfg = cfg.inversion_config()?;
    let prob = InversionProblem {
        model0: &asm.initial,
        geom: &asm.geometry,
        wavelet: &asm.wavelet,
        d_obs: &asm.d_obs,
        solver: &asm.solver,
        truth: Some(&asm.truth),
    };
    let rows = ablation_grid(&inv_cfg, pairs, &prob)?;
    let mut buf = Vec::new();
    write_ablation_csv(&rows, &mut buf)
        .map_err(|e| CliError::io("writing ablation rows", e))?;
    write_text(&dir.join("ablation.csv"), &String::from_utf8_lossy(&buf))?;

    let spent = pairs.len() * inv_cfg.total_physics_steps;
    write_manifest(&cfg, &dir, &clock, spent, None)?;
    Ok(dir)
}

/// Parses an outer/inner split list like `30x10,15x20`.
pub fn parse_split_pairs(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let Some((outer, inner)) = part.split_once('x') else {
            return Err(CliError::config_one(format!(
                "split '{part}' must look like OUTERxINNER, e.g. 30x10"
            )));
        };
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::config_one(format!("split '{part}': '{s}' is not a count")))
        };
        pairs.push((parse(outer)?, parse(inner)?));
    }
    Ok(pairs)
}

fn prepare(
    base: &ExperimentConfig,
    overrides: &Overrides,
) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = base.clone();
    overrides.apply(&mut cfg);
    let errors = cfg.validate_collect();
    if !errors.is_empty() {
        return Err(CliError::config(errors));
    }
    let dir = cfg
        .output
        .dir
        .clone()
        .ok_or_else(|| CliError::config_one("output.dir: set it in the file or pass --out"))?;
    fs::create_dir_all(dir.join("gathers"))
        .map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    if cfg.output.snapshots {
        fs::create_dir_all(dir.join("snaps"))
            .map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    }
    write_text(&dir.join("config.echo"), &cfg.to_echo_string())?;
    Ok((cfg, dir))
}

fn write_inputs(cfg: &ExperimentConfig, dir: &Path) -> Result<Assembled> {
    let asm = assemble(cfg)?;
    save_field(&dir.join("truth.sfwi"), &asm.truth)?;
    save_field(&dir.join("initial.sfwi"), &asm.initial)?;
    save_gather(&dir.join("gathers").join("observed.sgth"), &asm.d_obs)?;
    if let Some(clean) = &asm.d_clean {
        save_gather(&dir.join("gathers").join("clean.sgth"), clean)?;
    }
    Ok(asm)
}

fn write_manifest(
    cfg: &ExperimentConfig,
    dir: &Path,
    clock: &Stopwatch,
    evaluations: usize,
    resolved_lambda: Option<f64>,
) -> Result<()> {
    let (started_unix, started, finished_unix, finished) = clock.stamp();
    let manifest = RunManifest {
        seed: cfg.method.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        physics_evaluations: evaluations,
        total_physics_steps: cfg.method.total_physics_steps,
        started_unix,
        finished_unix,
        started,
        finished,
        truth_sha256: sha256_of_file(&dir.join("truth.sfwi"))?,
        resolved_lambda,
        config: cfg.clone(),
    };
    manifest.save(&dir.join(MANIFEST_NAME))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}
