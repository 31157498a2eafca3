mod common;

use common::tiny_config;
use sfwi_cli::{run_experiment, Overrides, RunManifest};
use sfwi_core::{load_field, load_gather};
use sfwi_invert::Method;

fn out_into(dir: &std::path::Path) -> Overrides {
    Overrides { out: Some(dir.to_path_buf()), ..Overrides::default() }
}

#[test]
fn run_directory_has_the_full_layout_and_a_matching_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(Method::Fwi);
    let summary = run_experiment(&cfg, &out_into(tmp.path())).unwrap();

    for name in ["config.echo", "truth.sfwi", "initial.sfwi", "convergence.csv", "final.sfwi"] {
        assert!(tmp.path().join(name).exists(), "missing {name}");
    }
    assert!(tmp.path().join("gathers/observed.sgth").exists());
    assert!(!tmp.path().join("gathers/clean.sgth").exists());

    let manifest = RunManifest::load(&tmp.path().join("manifest.toml")).unwrap();
    assert_eq!(manifest.physics_evaluations, 6);
    assert_eq!(manifest.total_physics_steps, 6);
    assert_eq!(manifest.physics_evaluations, summary.output.physics_evaluations);
    assert_eq!(manifest.config.output.dir, Some(tmp.path().to_path_buf()));
    assert!(manifest.finished_unix >= manifest.started_unix);

    // Snapshots mirror the recorded steps: 1, 2, 4, 6.
    for step in [1, 2, 4, 6] {
        assert!(tmp.path().join(format!("snaps/snap_{step:06}.sfwi")).exists());
    }

    // The echo parses back to the run's exact configuration.
    let echo = std::fs::read_to_string(tmp.path().join("config.echo")).unwrap();
    let parsed = sfwi_cli::parse_config(&echo).unwrap();
    assert_eq!(parsed, summary.config);
}

#[test]
fn zero_weight_tv_run_reproduces_the_plain_run_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let plain_dir = tmp.path().join("plain");
    let tv_dir = tmp.path().join("tv");

    let plain = tiny_config(Method::Fwi);
    let mut tv = tiny_config(Method::FwiTv);
    tv.method.lambda_tv = Some(0.0);
    for cfg in [&plain, &tv] {
        assert!(cfg.validate_collect().is_empty());
    }

    let mut o = out_into(&plain_dir);
    o.deterministic = true;
    run_experiment(&plain, &o).unwrap();
    let mut o = out_into(&tv_dir);
    o.deterministic = true;
    run_experiment(&tv, &o).unwrap();

    let final_a = std::fs::read(plain_dir.join("final.sfwi")).unwrap();
    let final_b = std::fs::read(tv_dir.join("final.sfwi")).unwrap();
    assert_eq!(final_a, final_b);
    let csv_a = std::fs::read(plain_dir.join("convergence.csv")).unwrap();
    let csv_b = std::fs::read(tv_dir.join("convergence.csv")).unwrap();
    assert_eq!(csv_a, csv_b);

    let manifest = RunManifest::load(&tv_dir.join("manifest.toml")).unwrap();
    assert_eq!(manifest.resolved_lambda, Some(0.0));
}

#[test]
fn deterministic_reruns_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        let mut o = out_into(&dir);
        o.deterministic = true;
        run_experiment(&tiny_config(Method::Sfm), &o).unwrap();
        bytes.push((
            std::fs::read(dir.join("convergence.csv")).unwrap(),
            std::fs::read(dir.join("final.sfwi")).unwrap(),
        ));
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn noisy_runs_keep_both_gathers_at_the_requested_snr() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(Method::Fwi);
    cfg.scenario.name = sfwi_cli::ScenarioName::Noisy;
    cfg.acquisition.n_receivers = 12;
    cfg.solver.nt = 400;
    run_experiment(&cfg, &out_into(tmp.path())).unwrap();

    let clean = load_gather(&tmp.path().join("gathers/clean.sgth")).unwrap();
    let observed = load_gather(&tmp.path().join("gathers/observed.sgth")).unwrap();
    assert_eq!(clean.data.shape(), observed.data.shape());

    let noise = &observed.data - &clean.data;
    let noise_power = noise.iter().map(|v| v * v).sum::<f64>() / noise.len() as f64;
    let measured = 10.0 * (clean.power() / noise_power).log10();
    // 9600 samples; the sampling error of the power estimate is ~0.06 dB.
    assert!(
        (measured - 3.5).abs() < 0.3,
        "snr measured from files: {measured} dB, requested 3.5 dB"
    );
}

#[test]
fn seed_override_lands_in_echo_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let mut o = out_into(tmp.path());
    o.seed = Some(41);
    run_experiment(&tiny_config(Method::Dip), &o).unwrap();

    let manifest = RunManifest::load(&tmp.path().join("manifest.toml")).unwrap();
    assert_eq!(manifest.seed, 41);
    assert_eq!(manifest.config.method.seed, 41);
    let echo = std::fs::read_to_string(tmp.path().join("config.echo")).unwrap();
    assert!(echo.contains("seed = 41"), "{echo}");
}

#[test]
fn snapshots_can_be_disabled() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = tiny_config(Method::Fwi);
    cfg.output.snapshots = false;
    run_experiment(&cfg, &out_into(tmp.path())).unwrap();
    assert!(!tmp.path().join("snaps").exists());
    assert!(tmp.path().join("final.sfwi").exists());
}

#[test]
fn final_model_file_round_trips_the_returned_model() {
    let tmp = tempfile::tempdir().unwrap();
    let summary = run_experiment(&tiny_config(Method::Fwi), &out_into(tmp.path())).unwrap();
    let on_disk = load_field(&tmp.path().join("final.sfwi")).unwrap();
    // The field format stores f32 payloads, so compare after that rounding.
    let expect: Vec<f32> =
        summary.output.final_model.values().iter().map(|&v| v as f32).collect();
    let got: Vec<f32> = on_disk.values().iter().map(|&v| v as f32).collect();
    assert_eq!(expect, got);
}
