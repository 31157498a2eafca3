use ndarray::Array3;

use crate::{CoreError, Result};

/// Recorded traces for a set of shots, indexed `[shot][receiver][time]`,
/// together with the sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotGather {
    pub data: Array3<f64>,
    pub dt: f64,
}

impl ShotGather {
    pub fn new(data: Array3<f64>, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(CoreError::invalid(format!("time step must be positive, got {dt}")));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::invalid("gather contains non-finite samples"));
        }
        Ok(ShotGather { data, dt })
    }

    pub fn n_shots(&self) -> usize {
        self.data.dim().0
    }

    pub fn n_receivers(&self) -> usize {
        self.data.dim().1
    }

    pub fn nt(&self) -> usize {
        self.data.dim().2
    }

    pub fn n_samples(&self) -> usize {
        self.data.len()
    }

    /// Mean squared amplitude over every sample, the signal power used when
    /// scaling additive noise.
    pub fn power(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().map(|&v| v * v).sum::<f64>() / self.data.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_of_constant_gather() {
        let g = ShotGather::new(Array3::from_elem((2, 3, 4), 2.0), 1e-3).unwrap();
        assert_eq!(g.power(), 4.0);
        assert_eq!(g.n_samples(), 24);
    }

    #[test]
    fn power_mixes_all_shots() {
        let mut data = Array3::zeros((2, 1, 2));
        data[(0, 0, 0)] = 1.0;
        data[(1, 0, 1)] = 3.0;
        let g = ShotGather::new(data, 1e-3).unwrap();
        assert_eq!(g.power(), (1.0 + 9.0) / 4.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ShotGather::new(Array3::zeros((1, 1, 1)), 0.0).is_err());
        let mut data = Array3::zeros((1, 1, 2));
        data[(0, 0, 0)] = f64::INFINITY;
        assert!(ShotGather::new(data, 1e-3).is_err());
    }
}
