//! Cross-run comparison: a metrics table plus overlaid convergence and
//! rank-evolution plots. Only completed runs compare (the manifest is the
//! completion marker), and every run must have been scored against the
//! same truth file, enforced by checksum.

use std::path::{Path, PathBuf};

use sfwi_core::{load_field, VelocityModel};
use sfwi_metrics::{effective_rank, rel_l2, ssim, SsimConfig};

use crate::manifest::{sha256_of_file, RunManifest, MANIFEST_NAME};
use crate::plot::{line_plot_svg, Series};
use crate::{CliError, Result};

pub struct LoadedRun {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub rows: Vec<CsvRow>,
    pub final_model: VelocityModel,
    pub truth: Option<VelocityModel>,
}

/// One parsed convergence row; only the columns the comparison uses.
#[derive(Debug, Clone, Copy)]
pub struct CsvRow {
    pub step: f64,
    pub misfit: f64,
    pub rank: f64,
}

pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let manifest_path = dir.join(MANIFEST_NAME);
    if !manifest_path.exists() {
        return Err(CliError::config_one(format!(
            "{}: no manifest; the run is incomplete or not a run directory",
            dir.display()
        )));
    }
    let manifest = RunManifest::load(&manifest_path)?;
    let rows = parse_convergence(&dir.join("convergence.csv"))?;
    let final_model = load_field(&dir.join("final.sfwi"))?;
    let truth_path = dir.join("truth.sfwi");
    let truth = if truth_path.exists() {
        let actual = sha256_of_file(&truth_path)?;
        if !manifest.truth_sha256.is_empty() && actual != manifest.truth_sha256 {
            return Err(CliError::config_one(format!(
                "{}: truth.sfwi does not match the checksum in its manifest",
                dir.display()
            )));
        }
        Some(load_field(&truth_path)?)
    } else {
        None
    };
    Ok(LoadedRun { dir: dir.to_path_buf(), manifest, rows, final_model, truth })
}

fn parse_convergence(path: &Path) -> Result<Vec<CsvRow>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("step,misfit,rel_l2,ssim,rank,seconds") => {}
        other => {
            return Err(CliError::malformed(
                path,
                format!("unexpected header {:?}", other.unwrap_or("")),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(CliError::malformed(path, format!("row {} has {} columns", i + 2, fields.len())));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| CliError::malformed(path, format!("row {}: bad {what} '{s}'", i + 2)))
        };
        rows.push(CsvRow {
            step: num(fields[0], "step")?,
            misfit: num(fields[1], "misfit")?,
            rank: num(fields[4], "rank")?,
        });
    }
    if rows.is_empty() {
        return Err(CliError::malformed(path, "no convergence rows"));
    }
    Ok(rows)
}

/// Builds `comparison.csv`, `convergence.svg` and `rank.svg` in `out`.
/// Metrics against the truth stay empty for runs without a truth file.
pub fn compare_runs(dirs: &[PathBuf], out: &Path) -> Result<PathBuf> {
    if dirs.is_empty() {
        return Err(CliError::config_one("compare needs at least one run directory"));
    }
    let runs: Vec<LoadedRun> = dirs.iter().map(|d| load_run(d)).collect::<Result<_>>()?;

    let mut seen: Option<(&Path, &str)> = None;
    for run in &runs {
        if run.truth.is_none() || run.manifest.truth_sha256.is_empty() {
            continue;
        }
        match seen {
            None => seen = Some((&run.dir, &run.manifest.truth_sha256)),
            Some((first, sha)) => {
                if sha != run.manifest.truth_sha256 {
                    return Err(CliError::config_one(format!(
                        "truth checksum mismatch: {} and {} were scored against different \
                         truth models",
                        first.display(),
                        run.dir.display()
                    )));
                }
            }
        }
    }

    std::fs::create_dir_all(out)
        .map_err(|e| CliError::io(format!("creating {}", out.display()), e))?;

    let mut csv = String::from("method,rel_l2,ssim,final_misfit,rank\n");
    for run in &runs {
        let (rel, structural) = match &run.truth {
            Some(truth) => (
                Some(rel_l2(run.final_model.values(), truth.values())?),
                Some(ssim(run.final_model.values(), truth.values(), &SsimConfig::default())?),
            ),
            None => (None, None),
        };
        let rank = effective_rank(run.final_model.values(), None)?;
        let misfit = run.rows.last().expect("parse_convergence rejects empty files").misfit;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            run.manifest.config.method.name,
            rel.map(|v| v.to_string()).unwrap_or_default(),
            structural.map(|v| v.to_string()).unwrap_or_default(),
            misfit,
            rank
        ));
    }
    let table = out.join("comparison.csv");
    std::fs::write(&table, csv)
        .map_err(|e| CliError::io(format!("writing {}", table.display()), e))?;

    let label = |run: &LoadedRun| {
        let base = run
            .dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| run.dir.display().to_string());
        format!("{} ({base})", run.manifest.config.method.name)
    };
    let misfit_series: Vec<Series> = runs
        .iter()
        .map(|r| Series {
            label: label(r),
            points: r.rows.iter().map(|row| (row.step, row.misfit)).collect(),
        })
        .collect();
    let rank_series: Vec<Series> = runs
        .iter()
        .map(|r| Series {
            label: label(r),
            points: r.rows.iter().map(|row| (row.step, row.rank)).collect(),
        })
        .collect();
    std::fs::write(
        out.join("convergence.svg"),
        line_plot_svg("data misfit", "physics step", "misfit", &misfit_series, true),
    )
    .map_err(|e| CliError::io("writing convergence.svg", e))?;
    std::fs::write(
        out.join("rank.svg"),
        line_plot_svg("model complexity", "physics step", "effective rank", &rank_series, false),
    )
    .map_err(|e| CliError::io("writing rank.svg", e))?;

    Ok(table)
}
