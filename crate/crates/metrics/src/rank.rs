use ndarray::Array2;

use crate::{MetricsError, Result};

/// Relative tolerance used to decide that a singular value is "numerically
/// nonzero". Models are stored on disk as f32, so single-precision machine
/// epsilon is the scale below which structure is indistinguishable from
/// rounding; double epsilon would count storage noise as rank.
pub const DEFAULT_RANK_ETA: f64 = f32::EPSILON as f64;

const MAX_SWEEPS: usize = 100;
const ORTHO_TOL: f64 = 1.0e-14;

/// Number of singular values above `sigma_max * max(nx, nz) * eta`.
/// `eta = None` uses [`DEFAULT_RANK_ETA`].
pub fn effective_rank(m: &Array2<f64>, eta: Option<f64>) -> Result<usize> {
    let eta = eta.unwrap_or(DEFAULT_RANK_ETA);
    if !(eta > 0.0) {
        return Err(MetricsError::invalid(format!("eta must be positive, got {eta}")));
    }
    let sigma = singular_values(m)?;
    let sigma_max = sigma[0];
    if sigma_max == 0.0 {
        return Ok(0);
    }
    let (nz, nx) = m.dim();
    let threshold = sigma_max * nx.max(nz) as f64 * eta;
    Ok(sigma.iter().take_while(|&&s| s > threshold).count())
}

/// All singular values, descending, via one-sided Jacobi: plane rotations
/// orthogonalize the columns, whose norms then equal the singular values.
/// Rotations preserve the Frobenius norm, so `sum sigma_i^2 = ||m||_F^2`
/// holds exactly up to rounding.
pub fn singular_values(m: &Array2<f64>) -> Result<Vec<f64>> {
    let (nz, nx) = m.dim();
    if nz == 0 || nx == 0 {
        return Err(MetricsError::invalid("matrix must be non-empty"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::invalid("matrix contains non-finite values"));
    }

    // Work with the taller orientation so each column is long and the pair
    // loop is over the smaller dimension.
    let mut a: Array2<f64> = if nz >= nx { m.clone() } else { m.t().to_owned() };
    let (rows, cols) = a.dim();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for r in 0..rows {
                    let (x, y) = (a[(r, p)], a[(r, q)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                // Normalize against the larger column, not the geometric
                // mean. When a duplicate pair collapses one column to
                // rounding-level norm, rotation noise scales with the large
                // column and a geometric-mean threshold (which shrinks with
                // the small one) is never met again; constant matrices can
                // then sweep forever. The max-based test gives singular
                // values absolute accuracy ~tol * sigma_max, ample for rank
                // counting.
                if gamma.abs() <= ORTHO_TOL * alpha.max(beta) {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let (x, y) = (a[(r, p)], a[(r, q)]);
                    a[(r, p)] = c * x - s * y;
                    a[(r, q)] = s * x + c * y;
                }
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(MetricsError::Numeric(format!(
            "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut sigma: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|r| a[(r, j)] * a[(r, j)]).sum::<f64>().sqrt())
        .collect();
    sigma.sort_by(|x, y| y.partial_cmp(x).expect("norms are finite"));
    Ok(sigma)
}
