use sfwi_core::ShotGather;

use crate::{Result, SolverError};

/// Least-squares data misfit `1/2 sum (d_syn - d_obs)^2` over every shot,
/// receiver and sample. No dt or trace-count weighting: learning rates are
/// calibrated against this raw convention.
pub fn data_misfit(d_syn: &ShotGather, d_obs: &ShotGather) -> Result<f64> {
    if d_syn.data.dim() != d_obs.data.dim() {
        return Err(SolverError::invalid(format!(
            "gather shapes differ: {:?} vs {:?}",
            d_syn.data.dim(),
            d_obs.data.dim()
        )));
    }
    let sum: f64 = d_syn
        .data
        .iter()
        .zip(d_obs.data.iter())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    Ok(0.5 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    fn gather(data: Array3<f64>) -> ShotGather {
        ShotGather::new(data, 1.0e-3).unwrap()
    }

    #[test]
    fn identical_gathers_have_zero_misfit() {
        let g = gather(Array3::from_shape_fn((2, 3, 5), |(s, r, t)| (s + r + t) as f64));
        assert_eq!(data_misfit(&g, &g).unwrap(), 0.0);
    }

    #[test]
    fn all_ones_versus_zero_is_half_n() {
        let ones = gather(Array3::from_elem((2, 4, 25), 1.0));
        let zeros = gather(Array3::zeros((2, 4, 25)));
        assert_eq!(data_misfit(&ones, &zeros).unwrap(), 100.0);
    }

    #[test]
    fn matches_scalar_loop() {
        let a = gather(Array3::from_shape_fn((3, 4, 17), |(s, r, t)| {
            ((s * 31 + r * 7 + t) % 13) as f64 * 0.25 - 1.0
        }));
        let b = gather(Array3::from_shape_fn((3, 4, 17), |(s, r, t)| {
            ((s * 17 + r * 3 + t * 5) % 11) as f64 * 0.5 - 2.0
        }));
        let got = data_misfit(&a, &b).unwrap();
        let mut oracle = 0.0;
        for s in 0..3 {
            for r in 0..4 {
                for t in 0..17 {
                    let d = a.data[(s, r, t)] - b.data[(s, r, t)];
                    oracle += 0.5 * d * d;
                }
            }
        }
        assert!((got - oracle).abs() <= 1e-10 * oracle);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = gather(Array3::zeros((2, 3, 5)));
        let b = gather(Array3::zeros((2, 3, 6)));
        assert!(data_misfit(&a, &b).is_err());
    }
}
