//! Checkpoint file round-trips and corruption handling.

use std::fs;

use sfwi_net::{load_params, save_params, FlowNet, NetConfig, NetError, Normalization};

fn tiny_cfg() -> NetConfig {
    NetConfig {
        base_channels: 8,
        channel_mults: vec![1, 2],
        blocks_per_level: 1,
        groups: 4,
        time_multiplier: 1000.0,
    }
}

fn norm() -> Normalization {
    Normalization { mean: 2500.0, scale: 417.25 }
}

#[test]
fn round_trip_recovers_architecture_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.sfnp");
    let cfg = tiny_cfg();
    let net = FlowNet::new(cfg.clone()).unwrap();
    let params = net.init_params(42);

    save_params(&path, &cfg, norm(), &params).unwrap();
    let (cfg2, norm2, loaded) = load_params(&path).unwrap();

    assert_eq!(cfg2, cfg);
    assert_eq!(norm2, norm());
    assert_eq!(loaded.len(), params.len());
    // Storage is f32, so loading reproduces the f32 rounding exactly.
    for (orig, back) in params.iter().zip(&loaded) {
        assert_eq!(*back, *orig as f32 as f64);
    }

    // A second save of the loaded values must reproduce the file bit for bit.
    let path2 = dir.path().join("net2.sfnp");
    save_params(&path2, &cfg2, norm2, &loaded).unwrap();
    assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
}

#[test]
fn bad_magic_is_reported_at_offset_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.sfnp");
    let cfg = tiny_cfg();
    let params = FlowNet::new(cfg.clone()).unwrap().init_params(1);
    save_params(&path, &cfg, norm(), &params).unwrap();

    let mut bytes = fs::read(&path).unwrap();
    bytes[0] = b'X';
    fs::write(&path, bytes).unwrap();

    match load_params(&path) {
        Err(NetError::Format { offset, .. }) => assert_eq!(offset, 0),
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn truncation_is_reported_with_an_offset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.sfnp");
    let cfg = tiny_cfg();
    let params = FlowNet::new(cfg.clone()).unwrap().init_params(1);
    save_params(&path, &cfg, norm(), &params).unwrap();

    let bytes = fs::read(&path).unwrap();
    let cut = bytes.len() - 10;
    fs::write(&path, &bytes[..cut]).unwrap();

    match load_params(&path) {
        Err(NetError::Format { offset, message }) => {
            assert!(offset as usize <= cut, "offset {offset} past truncation point {cut}");
            assert!(message.contains("truncated"), "message: {message}");
        }
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn trailing_garbage_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.sfnp");
    let cfg = tiny_cfg();
    let params = FlowNet::new(cfg.clone()).unwrap().init_params(1);
    save_params(&path, &cfg, norm(), &params).unwrap();

    let mut bytes = fs::read(&path).unwrap();
    let clean_len = bytes.len();
    bytes.extend_from_slice(&[0u8; 3]);
    fs::write(&path, bytes).unwrap();

    match load_params(&path) {
        Err(NetError::Format { offset, message }) => {
            assert_eq!(offset as usize, clean_len);
            assert!(message.contains("trailing"), "message: {message}");
        }
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn parameter_count_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.sfnp");
    let cfg = tiny_cfg();
    let params = FlowNet::new(cfg.clone()).unwrap().init_params(1);
    save_params(&path, &cfg, norm(), &params).unwrap();

    // Corrupt the stored count without touching the payload.
    let mut bytes = fs::read(&path).unwrap();
    // magic 4 | version 4 | base 4 | n_mults 4 | mults 8 | blocks 4
    // | groups 4 | time 8 | mean 8 | scale 8 -> count at byte 56.
    let count_at = 56;
    let stored = u64::from_le_bytes(bytes[count_at..count_at + 8].try_into().unwrap());
    bytes[count_at..count_at + 8].copy_from_slice(&(stored - 1).to_le_bytes());
    fs::write(&path, bytes).unwrap();

    match load_params(&path) {
        Err(NetError::Format { message, .. }) => {
            assert!(message.contains("does not match"), "message: {message}");
        }
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn unsupported_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.sfnp");
    let cfg = tiny_cfg();
    let params = FlowNet::new(cfg.clone()).unwrap().init_params(1);
    save_params(&path, &cfg, norm(), &params).unwrap();

    let mut bytes = fs::read(&path).unwrap();
    bytes[4..8].copy_from_slice(&99u32.to_le_bytes());
    fs::write(&path, bytes).unwrap();

    match load_params(&path) {
        Err(NetError::Format { message, .. }) => {
            assert!(message.contains("version"), "message: {message}");
        }
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn wrong_length_vector_cannot_be_saved() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.sfnp");
    let cfg = tiny_cfg();
    assert!(save_params(&path, &cfg, norm(), &[0.0; 10]).is_err());
}
