use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sfwi_cli::{
    compare_runs, generate_synthetic_benchmark, load_config_or_manifest, parse_split_pairs,
    run_ablation, run_experiment, run_forward, CliError, ExperimentConfig, Overrides, Result,
};
use sfwi_core::{load_field, save_field, Grid2D};
use sfwi_metrics::{deblur_report, effective_rank, rel_l2, ssim, SpectralBands, SsimConfig};

#[derive(Parser)]
#[command(
    name = "sfwi",
    version,
    about = "2D acoustic waveform inversion experiments",
    propagate_version = true
)]
struct Cli {
    /// Configuration file; a manifest from a previous run also works.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override (overrides method.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread count; runs are bit-identical at any value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Single thread and blanked wall-clock columns, for byte-for-byte
    /// reproducible output.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate observed data for the configured scenario; no inversion.
    Forward,
    /// Run the configured inversion end to end.
    Invert,
    /// Score a model against a truth model (rel_l2, ssim, rank).
    Metrics {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Spectral sharpness report of a corrected model vs its corrupted
    /// original. Band defaults scale with the grid's Nyquist wavenumber.
    Deblur {
        #[arg(long)]
        corrupt: PathBuf,
        #[arg(long)]
        corrected: PathBuf,
        /// Band-content window, cycles/m (defaults: 0.1 and 0.8 Nyquist).
        #[arg(long)]
        band_lo: Option<f64>,
        #[arg(long)]
        band_hi: Option<f64>,
        /// High-wavenumber cutoff, cycles/m (default: 0.3 Nyquist).
        #[arg(long)]
        kc: Option<f64>,
    },
    /// Compare completed run directories: metrics table plus overlaid
    /// convergence and rank plots, written to --out.
    Compare {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
    /// Flow-guided runs across outer/inner splits of the same budget.
    Ablate {
        /// Comma-separated splits, e.g. 30x10,15x20,10x30.
        #[arg(long)]
        pairs: String,
    },
    /// Write a synthetic benchmark model to a field file.
    GenModel {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 64)]
        nx: usize,
        #[arg(long, default_value_t = 64)]
        nz: usize,
        #[arg(long, default_value_t = 10.0)]
        dx: f64,
        #[arg(long, default_value_t = 10.0)]
        dz: f64,
        /// Output file path.
        path: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    configure_threads(&cli)?;
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        deterministic: cli.deterministic,
    };
    let Cli { config, out, seed, command, .. } = cli;
    let load_config = || -> Result<ExperimentConfig> {
        match &config {
            Some(path) => load_config_or_manifest(path),
            None => Ok(ExperimentConfig::default()),
        }
    };
    match command {
        Command::Forward => {
            let cfg = load_config()?;
            let dir = run_forward(&cfg, &overrides)?;
            println!("forward data written to {}", dir.display());
        }
        Command::Invert => {
            let cfg = load_config()?;
            let summary = run_experiment(&cfg, &overrides)?;
            let last = summary.output.record.last().expect("runs record at least one row");
            println!(
                "done: {} physics steps, final misfit {:.6e}, results in {}",
                summary.output.physics_evaluations,
                last.data_misfit,
                summary.dir.display()
            );
        }
        Command::Metrics { truth, model } => {
            let truth = load_field(&truth)?;
            let model = load_field(&model)?;
            let rel = rel_l2(model.values(), truth.values())?;
            let s = ssim(model.values(), truth.values(), &SsimConfig::default())?;
            let rank = effective_rank(model.values(), None)?;
            println!("rel_l2,ssim,rank");
            println!("{rel},{s},{rank}");
        }
        Command::Deblur { corrupt, corrected, band_lo, band_hi, kc } => {
            let corrupt = load_field(&corrupt)?;
            let corrected = load_field(&corrected)?;
            let nyquist = 0.5 / corrupt.grid().dx.min(corrupt.grid().dz);
            let bands = SpectralBands {
                band_lo: band_lo.unwrap_or(0.1 * nyquist),
                band_hi: band_hi.unwrap_or(0.8 * nyquist),
                k_c: kc.unwrap_or(0.3 * nyquist),
            };
            let report = deblur_report(&corrupt, &corrected, &bands)?;
            match &out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)
                        .map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
                    let path = dir.join("deblur.csv");
                    std::fs::write(&path, report.to_csv())
                        .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
                    println!("report written to {}", path.display());
                }
                None => print!("{}", report.to_csv()),
            }
        }
        Command::Compare { dirs } => {
            let out = out
                .clone()
                .ok_or_else(|| CliError::config_one("compare needs --out for its report"))?;
            let table = compare_runs(&dirs, &out)?;
            println!("comparison written to {}", table.display());
        }
        Command::Ablate { pairs } => {
            let cfg = load_config()?;
            let pairs = parse_split_pairs(&pairs)?;
            let dir = run_ablation(&cfg, &pairs, &overrides)?;
            println!("ablation written to {}", dir.display());
        }
        Command::GenModel { kind, nx, nz, dx, dz, path } => {
            let kind: sfwi_cli::BenchmarkKind = kind.parse()?;
            let grid = Grid2D::new(nx, nz, dx, dz)?;
            let model = generate_synthetic_benchmark(kind, grid, seed.unwrap_or(0))?;
            save_field(&path, &model)?;
            println!("model written to {}", path.display());
        }
    }
    Ok(())
}


#[cfg(feature = "parallel")]
fn configure_threads(cli: &Cli) -> Result<()> {
    let threads = if cli.deterministic { Some(1) } else { cli.threads };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config_one(format!("--threads: {e}")))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_cli: &Cli) -> Result<()> {
    Ok(())
}
