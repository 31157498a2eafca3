//! Experiment harness around the inversion drivers: configuration files
//! with full validation, scenario assembly (truth, acquisition, degraded
//! data), a standard output directory layout with a completion manifest,
//! cross-run comparison with plots, and synthetic benchmark models.

pub mod bench;
pub mod compare;
pub mod config;
pub mod error;
pub mod experiment;
pub mod manifest;
pub mod plot;
pub mod scenario;

pub use bench::{generate_synthetic_benchmark, BenchmarkKind, BENCHMARK_KINDS};
pub use compare::{compare_runs, load_run};
pub use config::{parse_config, ExperimentConfig, InitKind, MethodName, ScenarioName};
pub use error::{CliError, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO};
pub use experiment::{
    dispatch, parse_split_pairs, run_ablation, run_experiment, run_forward, Overrides, RunSummary,
};
pub use manifest::{load_config_or_manifest, sha256_hex, sha256_of_file, RunManifest};

pub type Result<T> = std::result::Result<T, CliError>;
