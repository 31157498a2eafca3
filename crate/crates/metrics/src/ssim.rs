use ndarray::Array2;

use crate::{MetricsError, Result};

/// Structural-similarity settings. The window is a truncated Gaussian of
/// odd size; `l` is the dynamic range after normalization, which is 1
/// because both fields are jointly min-max normalized before comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimConfig {
    pub window_std: f64,
    pub window_size: usize,
    pub k1: f64,
    pub k2: f64,
    pub l: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        SsimConfig { window_std: 1.5, window_size: 11, k1: 0.01, k2: 0.03, l: 1.0 }
    }
}

impl SsimConfig {
    fn validate(&self) -> Result<()> {
        if self.window_size % 2 == 0 || self.window_size == 0 {
            return Err(MetricsError::invalid(format!(
                "window size must be odd, got {}",
                self.window_size
            )));
        }
        if !(self.window_std > 0.0) || !(self.k1 > 0.0) || !(self.k2 > 0.0) || !(self.l > 0.0) {
            return Err(MetricsError::invalid(
                "window_std, k1, k2 and l must all be positive".to_string(),
            ));
        }
        Ok(())
    }
}

/// Mean SSIM between two fields after joint min-max normalization.
///
/// The shared min and max put both fields on one scale, so an amplitude
/// bias between them lowers the score instead of being normalized away.
/// Local means and (co)variances come from Gaussian-weighted windows with
/// reflect padding; the returned value is the average of the SSIM map and
/// lies in [-1, 1].
pub fn ssim(a: &Array2<f64>, b: &Array2<f64>, cfg: &SsimConfig) -> Result<f64> {
    cfg.validate()?;
    if a.dim() != b.dim() {
        return Err(MetricsError::invalid(format!(
            "shape mismatch: {:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let (nz, nx) = a.dim();
    if nz < cfg.window_size || nx < cfg.window_size {
        return Err(MetricsError::invalid(format!(
            "field {nz}x{nx} smaller than {0}x{0} window",
            cfg.window_size
        )));
    }

    let lo = a.iter().chain(b.iter()).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b.iter()).copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(MetricsError::invalid("fields contain non-finite values"));
    }
    if hi == lo {
        return if a == b {
            Ok(1.0)
        } else {
            Err(MetricsError::DegenerateRange(
                "joint value range collapsed but fields differ".to_string(),
            ))
        };
    }

    let na = a.mapv(|v| (v - lo) / (hi - lo));
    let nb = b.mapv(|v| (v - lo) / (hi - lo));

    let kernel = gaussian_window(cfg.window_std, cfg.window_size);
    let mu_a = filter(&na, &kernel);
    let mu_b = filter(&nb, &kernel);
    let m_aa = filter(&(&na * &na), &kernel);
    let m_bb = filter(&(&nb * &nb), &kernel);
    let m_ab = filter(&(&na * &nb), &kernel);

    let c1 = (cfg.k1 * cfg.l).powi(2);
    let c2 = (cfg.k2 * cfg.l).powi(2);
    let mut total = 0.0;
    for iz in 0..nz {
        for ix in 0..nx {
            let (ma, mb) = (mu_a[(iz, ix)], mu_b[(iz, ix)]);
            let va = m_aa[(iz, ix)] - ma * ma;
            let vb = m_bb[(iz, ix)] - mb * mb;
            let cov = m_ab[(iz, ix)] - ma * mb;
            total += (2.0 * ma * mb + c1) * (2.0 * cov + c2)
                / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
    }
    Ok(total / (nz * nx) as f64)
}

fn gaussian_window(std: f64, size: usize) -> Vec<f64> {
    let radius = (size / 2) as f64;
    let mut w: Vec<f64> = (0..size)
        .map(|i| {
            let x = i as f64 - radius;
            (-x * x / (2.0 * std * std)).exp()
        })
        .collect();
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v /= sum;
    }
    w
}

/// Separable correlation with reflect padding (edge sample repeated).
fn filter(field: &Array2<f64>, kernel: &[f64]) -> Array2<f64> {
    let rows = filter_rows(field, kernel);
    filter_rows(&rows.t().to_owned(), kernel).t().to_owned()
}

fn filter_rows(field: &Array2<f64>, kernel: &[f64]) -> Array2<f64> {
    let (nz, nx) = field.dim();
    let radius = kernel.len() / 2;
    let mut out = Array2::zeros((nz, nx));
    for iz in 0..nz {
        for ix in 0..nx {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let j = ix as isize + k as isize - radius as isize;
                let j = if j < 0 {
                    (-j - 1) as usize
                } else if j >= nx as isize {
                    2 * nx - 1 - j as usize
                } else {
                    j as usize
                };
                acc += w * field[(iz, j)];
            }
            out[(iz, ix)] = acc;
        }
    }
    out
}
