use ndarray::Array2;

use crate::{MetricsError, Result};

/// Relative L2 error `||m - m_true|| / ||m_true||`.
pub fn rel_l2(m: &Array2<f64>, m_true: &Array2<f64>) -> Result<f64> {
    if m.dim() != m_true.dim() {
        return Err(MetricsError::invalid(format!(
            "shape mismatch: {:?} vs {:?}",
            m.dim(),
            m_true.dim()
        )));
    }
    let norm_true: f64 = m_true.iter().map(|&v| v * v).sum::<f64>().sqrt();
    if norm_true == 0.0 {
        return Err(MetricsError::invalid("reference field has zero norm"));
    }
    let diff: f64 = m
        .iter()
        .zip(m_true.iter())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / norm_true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(f: impl Fn(usize, usize) -> f64) -> Array2<f64> {
        Array2::from_shape_fn((12, 16), |(iz, ix)| f(iz, ix))
    }

    #[test]
    fn identical_fields_give_zero() {
        let a = field(|iz, ix| 1500.0 + iz as f64 + ix as f64);
        assert_eq!(rel_l2(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn doubled_field_gives_one() {
        let t = field(|iz, ix| 1500.0 + (iz * 3 + ix) as f64);
        let m = t.mapv(|v| 2.0 * v);
        let r = rel_l2(&m, &t).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_scalar_loop() {
        let t = field(|iz, ix| 1500.0 + ((iz * 31 + ix * 7) % 100) as f64);
        let m = field(|iz, ix| 1500.0 + ((iz * 13 + ix * 29) % 100) as f64);
        let r = rel_l2(&m, &t).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for iz in 0..12 {
            for ix in 0..16 {
                num += (m[(iz, ix)] - t[(iz, ix)]).powi(2);
                den += t[(iz, ix)].powi(2);
            }
        }
        let oracle = (num / den).sqrt();
        assert!((r - oracle).abs() <= 1e-12 * oracle);
    }

    #[test]
    fn homogeneous_in_the_error() {
        let t = field(|iz, ix| 1500.0 + (iz + ix) as f64);
        let e = field(|iz, ix| ((iz * 7 + ix * 3) % 11) as f64 - 5.0);
        let alpha = 3.75;
        let r1 = rel_l2(&(&t + &e), &t).unwrap();
        let r2 = rel_l2(&(&t + &(alpha * &e)), &t).unwrap();
        assert!((r2 - alpha * r1).abs() < 1e-12 * r2.max(1.0));
    }

    #[test]
    fn zero_reference_rejected() {
        let z = Array2::zeros((4, 4));
        let m = Array2::from_elem((4, 4), 1.0);
        assert!(rel_l2(&m, &z).is_err());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = Array2::zeros((4, 4));
        let b = Array2::from_elem((4, 5), 1.0);
        assert!(rel_l2(&a, &b).is_err());
    }
}
