//! End-to-end checks through the installed binary: argument wiring, exit
//! codes, and stdout formats.

use std::path::Path;
use std::process::{Command, Output};

fn sfwi(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfwi"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_tiny_config(path: &Path) {
    std::fs::write(
        path,
        "
[grid]
nx = 16
nz = 16

[acquisition]
n_shots = 2
n_receivers = 8
f0 = 12.0

[solver]
nt = 160
pml_vref = 2100.0

[method]
total_physics_steps = 4
record_every = 2
bounds_max = 2600.0
lr_model = 2.0
",
    )
    .unwrap();
}

#[test]
fn invert_then_metrics_then_compare_succeed() {
    let tmp = tempfile::tempdir().unwrap();
    write_tiny_config(&tmp.path().join("run.toml"));

    let out = sfwi(
        &["invert", "--config", "run.toml", "--out", "run1", "--deterministic"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("run1/manifest.toml").exists());

    let out = sfwi(
        &["metrics", "--truth", "run1/truth.sfwi", "--model", "run1/final.sfwi"],
        tmp.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("rel_l2,ssim,rank\n"), "{text}");
    assert_eq!(text.lines().count(), 2);

    let out = sfwi(&["compare", "run1", "--out", "report"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("report/comparison.csv").exists());
}

#[test]
fn config_errors_exit_with_the_documented_code_and_list_every_key() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("bad.toml"),
        "[grid]\nnx = 3\ndx = -2.0\n\n[method]\nlr_model = 0.0\n",
    )
    .unwrap();
    let out = sfwi(&["invert", "--config", "bad.toml", "--out", "x"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    for needle in ["grid.nx", "grid.dx", "method.lr_model"] {
        assert!(err.contains(needle), "missing {needle} in: {err}");
    }
}

#[test]
fn missing_files_exit_with_the_io_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sfwi(&["metrics", "--truth", "no.sfwi", "--model", "no.sfwi"], tmp.path());
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gen_model_writes_a_loadable_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sfwi(
        &["gen-model", "--kind", "lens", "--nx", "32", "--nz", "24", "lens.sfwi"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let model = sfwi_core::load_field(&tmp.path().join("lens.sfwi")).unwrap();
    assert_eq!((model.grid().nx, model.grid().nz), (32, 24));

    let out = sfwi(&["gen-model", "--kind", "pyramid", "x.sfwi"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn deblur_prints_a_spectral_report() {
    let tmp = tempfile::tempdir().unwrap();
    sfwi(&["gen-model", "--kind", "lens", "--nx", "32", "--nz", "32", "a.sfwi"], tmp.path());
    sfwi(
        &["gen-model", "--kind", "two_layer", "--nx", "32", "--nz", "32", "b.sfwi"],
        tmp.path(),
    );
    let out = sfwi(&["deblur", "--corrupt", "a.sfwi", "--corrected", "b.sfwi"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("k,s_corrupt,s_corrected\n"), "{text}");
    assert!(text.lines().last().unwrap().starts_with("summary,"), "{text}");
}

#[test]
fn forward_writes_data_without_inverting() {
    let tmp = tempfile::tempdir().unwrap();
    write_tiny_config(&tmp.path().join("run.toml"));
    let out = sfwi(&["forward", "--config", "run.toml", "--out", "fwd"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("fwd/gathers/observed.sgth").exists());
    assert!(!tmp.path().join("fwd/final.sfwi").exists());
    assert!(!tmp.path().join("fwd/convergence.csv").exists());
    let manifest = sfwi_cli::RunManifest::load(&tmp.path().join("fwd/manifest.toml")).unwrap();
    assert_eq!(manifest.physics_evaluations, 0);
}

#[test]
fn ablate_writes_the_split_table() {
    let tmp = tempfile::tempdir().unwrap();
    write_tiny_config(&tmp.path().join("run.toml"));
    let out = sfwi(
        &[
            "ablate",
            "--config",
            "run.toml",
            "--pairs",
            "2x2,4x1",
            "--out",
            "ab",
            "--deterministic",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("ab/ablation.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "outer,inner,rel_l2,ssim");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2,2,"));
    assert!(lines[2].starts_with("4,1,"));
}

#[test]
fn rerun_from_manifest_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    write_tiny_config(&tmp.path().join("run.toml"));
    let out = sfwi(
        &["invert", "--config", "run.toml", "--out", "r1", "--deterministic"],
        tmp.path(),
    );
    assert!(out.status.success());
    let out = sfwi(
        &["invert", "--config", "r1/manifest.toml", "--out", "r2", "--deterministic"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = std::fs::read(tmp.path().join("r1/convergence.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("r2/convergence.csv")).unwrap();
    assert_eq!(a, b);
}
