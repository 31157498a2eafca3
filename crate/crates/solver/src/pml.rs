//! Convolutional PML profiles for the unsplit second-order formulation.
//!
//! Each axis carries two auxiliary memory fields (psi for the first
//! derivative, xi for the second) updated per step as
//! `mem <- b * mem + a * input` with `b = exp(-sigma dt)`, `a = b - 1`.
//! Inside the interior `sigma = 0`, so `b = 1`, `a = 0` and the memory
//! fields stay identically zero there; the update can therefore run over
//! the whole padded field without branching.

use crate::config::SolverConfig;

/// Per-cell damping coefficients along one padded axis.
#[derive(Debug, Clone)]
pub struct AxisProfile {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Quadratic damping profile: `sigma(l) = sigma_max (l / L)^2` with
/// `sigma_max = -3 vref ln(R) / (2 L)`, `l` the depth into the layer and
/// `L = pml_width * d` its thickness.
pub fn axis_profile(n_padded: usize, d: f64, cfg: &SolverConfig) -> AxisProfile {
    let pad = cfg.pad();
    let width_l = cfg.pml_width as f64 * d;
    let sigma_max = -3.0 * cfg.pml_vref * cfg.pml_reflection.ln() / (2.0 * width_l);

    let mut a = vec![0.0; n_padded];
    let mut b = vec![1.0; n_padded];
    for i in 0..n_padded {
        // Depth into the absorbing layer, in meters; zero in the interior.
        // The ghost frame (outer HALF_WIDTH cells) keeps the deepest value.
        let depth_cells = if i < pad {
            (pad - i).min(cfg.pml_width)
        } else if i >= n_padded - pad {
            (i - (n_padded - pad - 1)).min(cfg.pml_width)
        } else {
            0
        };
        if depth_cells > 0 {
            let l = depth_cells as f64 * d;
            let sigma = sigma_max * (l / width_l) * (l / width_l);
            b[i] = (-sigma * cfg.dt).exp();
            a[i] = b[i] - 1.0;
        }
    }
    AxisProfile { a, b }
}
