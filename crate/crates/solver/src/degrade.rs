//! Observation degradation: additive noise at a target SNR and uniform
//! shot decimation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sfwi_core::{AcquisitionGeometry, ShotGather};

use crate::{Result, SolverError};

/// Add white Gaussian noise with variance `P_signal / 10^(snr_db/10)`,
/// where `P_signal` is the mean squared amplitude over all samples.
/// Deterministic for a fixed seed: samples are drawn in storage order from
/// a counter-based generator.
pub fn add_gaussian_noise(gather: &ShotGather, snr_db: f64, seed: u64) -> Result<ShotGather> {
    if gather.n_samples() == 0 {
        return Err(SolverError::invalid("gather is empty"));
    }
    if !snr_db.is_finite() {
        return Err(SolverError::invalid(format!("snr_db must be finite, got {snr_db}")));
    }
    let power = gather.power();
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal is valid");
    let mut noisy = gather.data.clone();
    for v in noisy.iter_mut() {
        *v += sigma * normal.sample(&mut rng);
    }
    ShotGather::new(noisy, gather.dt).map_err(|e| SolverError::invalid(e.to_string()))
}

/// Keep `n_keep` sources at indices `round(i (n-1) / (k-1))`, endpoints
/// included; a single kept source is the middle one. Receivers unchanged.
pub fn subsample_shots(geom: &AcquisitionGeometry, n_keep: usize) -> Result<AcquisitionGeometry> {
    let n = geom.n_shots();
    if n_keep == 0 || n_keep > n {
        return Err(SolverError::invalid(format!(
            "n_keep must lie in [1, {n}], got {n_keep}"
        )));
    }
    let sources = if n_keep == 1 {
        vec![geom.sources[((n - 1) as f64 / 2.0).round() as usize]]
    } else {
        (0..n_keep)
            .map(|i| {
                let idx = (i as f64 * (n - 1) as f64 / (n_keep - 1) as f64).round() as usize;
                geom.sources[idx]
            })
            .collect()
    };
    Ok(AcquisitionGeometry { sources, receivers: geom.receivers.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    fn gather(n: usize) -> ShotGather {
        // Deterministic oscillating signal with unit-ish power.
        let data = Array3::from_shape_fn((1, 1, n), |(_, _, t)| (0.37 * t as f64).sin());
        ShotGather::new(data, 1.0e-3).unwrap()
    }

    #[test]
    fn huge_snr_leaves_data_unchanged() {
        let g = gather(1000);
        let out = add_gaussian_noise(&g, 300.0, 7).unwrap();
        for (a, b) in out.data.iter().zip(g.data.iter()) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn measured_snr_matches_request() {
        let g = gather(1_200_000);
        let snr_db = 3.5;
        let out = add_gaussian_noise(&g, snr_db, 42).unwrap();
        let p_signal = g.power();
        let p_noise: f64 = out
            .data
            .iter()
            .zip(g.data.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / g.n_samples() as f64;
        let measured = 10.0 * (p_signal / p_noise).log10();
        assert!(
            (measured - snr_db).abs() < 0.1,
            "measured {measured} dB, requested {snr_db} dB"
        );
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let g = gather(5000);
        let a = add_gaussian_noise(&g, 3.5, 99).unwrap();
        let b = add_gaussian_noise(&g, 3.5, 99).unwrap();
        assert_eq!(a.data, b.data);
        let c = add_gaussian_noise(&g, 3.5, 100).unwrap();
        assert_ne!(a.data, c.data);
    }

    fn line_geom(n: usize) -> AcquisitionGeometry {
        AcquisitionGeometry {
            sources: (0..n).map(|i| (i, 0)).collect(),
            receivers: vec![(0, 5)],
        }
    }

    #[test]
    fn keep_all_is_identity() {
        let g = line_geom(25);
        let out = subsample_shots(&g, 25).unwrap();
        assert_eq!(out.sources, g.sources);
    }

    #[test]
    fn twenty_five_to_five_lands_on_documented_indices() {
        let g = line_geom(25);
        let out = subsample_shots(&g, 5).unwrap();
        let kept: Vec<usize> = out.sources.iter().map(|&(ix, _)| ix).collect();
        assert_eq!(kept, vec![0, 6, 12, 18, 24]);
    }

    #[test]
    fn keep_two_gives_endpoints() {
        let g = line_geom(25);
        let out = subsample_shots(&g, 2).unwrap();
        assert_eq!(out.sources, vec![(0, 0), (24, 0)]);
    }

    #[test]
    fn keep_one_gives_middle() {
        let out = subsample_shots(&line_geom(25), 1).unwrap();
        assert_eq!(out.sources, vec![(12, 0)]);
        let out = subsample_shots(&line_geom(4), 1).unwrap();
        assert_eq!(out.sources, vec![(2, 0)]);
    }

    #[test]
    fn out_of_range_rejected() {
        let g = line_geom(4);
        assert!(subsample_shots(&g, 0).is_err());
        assert!(subsample_shots(&g, 5).is_err());
    }
}
