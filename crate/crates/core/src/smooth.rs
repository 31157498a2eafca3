use ndarray::Array2;

use crate::{CoreError, Result, VelocityModel};

/// Separable Gaussian blur of the model, used to build smooth starting
/// models from the true one.
///
/// `sigma` is in grid cells; `sigma = 0` returns the input unchanged. The
/// kernel is truncated at radius `ceil(4 sigma)` and renormalized to sum to
/// one, and boundaries reflect (edge sample repeated), so a constant field
/// stays exactly constant.
pub fn gaussian_smooth(model: &VelocityModel, sigma: f64) -> Result<VelocityModel> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(CoreError::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(model.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let rows = blur_rows(model.values(), &kernel);
    let cols = blur_rows(&rows.t().to_owned(), &kernel).t().to_owned();
    VelocityModel::new(*model.grid(), cols)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil() as usize;
    let mut k: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let x = i as f64 - radius as f64;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = k.iter().sum();
    for v in &mut k {
        *v /= total;
    }
    k
}

/// 1D convolution along each row with reflect padding: index `-i` maps to
/// `i - 1` and `n + i` to `n - 1 - i`.
fn blur_rows(field: &Array2<f64>, kernel: &[f64]) -> Array2<f64> {
    let (nz, nx) = field.dim();
    let radius = kernel.len() / 2;
    let mut out = Array2::zeros((nz, nx));
    for iz in 0..nz {
        for ix in 0..nx {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let j = ix as isize + k as isize - radius as isize;
                let j = reflect(j, nx);
                acc += w * field[(iz, j)];
            }
            out[(iz, ix)] = acc;
        }
    }
    out
}

fn reflect(j: isize, n: usize) -> usize {
    let n = n as isize;
    let mut j = j;
    // For kernels wider than the field the reflection may need to fold more
    // than once.
    loop {
        if j < 0 {
            j = -j - 1;
        } else if j >= n {
            j = 2 * n - 1 - j;
        } else {
            return j as usize;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Grid2D;
    use ndarray::Array2;

    fn grid(nx: usize, nz: usize) -> Grid2D {
        Grid2D::new(nx, nz, 10.0, 10.0).unwrap()
    }

    #[test]
    fn sigma_zero_is_identity() {
        let m = VelocityModel::new(
            grid(8, 8),
            Array2::from_shape_fn((8, 8), |(iz, ix)| (iz * 8 + ix) as f64),
        )
        .unwrap();
        let s = gaussian_smooth(&m, 0.0).unwrap();
        assert_eq!(s.values(), m.values());
    }

    #[test]
    fn constant_field_is_preserved_exactly() {
        let m = VelocityModel::constant(grid(16, 12), 2500.0).unwrap();
        let s = gaussian_smooth(&m, 3.0).unwrap();
        for &v in s.values() {
            assert!((v - 2500.0).abs() < 1e-9, "constant drifted to {v}");
        }
    }

    #[test]
    fn mean_is_roughly_preserved_and_extremes_shrink() {
        let g = grid(32, 32);
        let m = VelocityModel::new(
            g,
            Array2::from_shape_fn((32, 32), |(iz, _)| if iz < 16 { 1500.0 } else { 2500.0 }),
        )
        .unwrap();
        let s = gaussian_smooth(&m, 2.0).unwrap();
        assert!(s.max_velocity() <= 2500.0 + 1e-9);
        assert!(s.min_velocity() >= 1500.0 - 1e-9);
        // The step must actually blur: the transition row is now intermediate.
        let mid = s.values()[(16, 16)];
        assert!(mid > 1600.0 && mid < 2400.0, "step not blurred, mid = {mid}");
        let mean_in = m.values().mean().unwrap();
        let mean_out = s.values().mean().unwrap();
        assert!((mean_in - mean_out).abs() < 1.0);
    }

    #[test]
    fn kernel_sums_to_one() {
        for sigma in [0.5, 1.0, 3.7, 8.0] {
            let k = gaussian_kernel(sigma);
            let sum: f64 = k.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert_eq!(k.len(), 2 * ((4.0 * sigma).ceil() as usize) + 1);
        }
    }

    #[test]
    fn reflect_folds_multiple_times() {
        assert_eq!(reflect(-1, 4), 0);
        assert_eq!(reflect(-5, 4), 3); // -5 -> 4 -> 3
        assert_eq!(reflect(4, 4), 3);
        assert_eq!(reflect(9, 4), 1); // 9 -> -2 -> 1
    }
}
