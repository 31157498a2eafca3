use crate::{CoreError, Result};

/// Sampled source time function with its peak frequency, amplitudes are
/// dimensionless and peak at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RickerWavelet {
    pub samples: Vec<f64>,
    pub dt: f64,
    pub f0: f64,
    pub t0: f64,
}

/// Ricker wavelet `r(t) = (1 - 2 pi^2 f0^2 tau^2) exp(-pi^2 f0^2 tau^2)`
/// with `tau = t - t0`, sampled at `t_n = n dt` for `n = 0..nt`.
///
/// `t0` delays the peak so the wavelet starts near zero; pass `None` for the
/// usual `1.5 / f0`. A window too short to contain the main lobe (below
/// `2 t0`) still produces a wavelet but logs a warning, truncated sources
/// leak a step into the wavefield.
pub fn make_ricker(f0: f64, dt: f64, nt: usize, t0: Option<f64>) -> Result<RickerWavelet> {
    if !(f0 > 0.0) {
        return Err(CoreError::invalid(format!("peak frequency must be positive, got {f0}")));
    }
    if !(dt > 0.0) {
        return Err(CoreError::invalid(format!("time step must be positive, got {dt}")));
    }
    if nt == 0 {
        return Err(CoreError::invalid("wavelet needs at least one sample"));
    }
    let t0 = t0.unwrap_or(1.5 / f0);
    if !(t0 >= 0.0) {
        return Err(CoreError::invalid(format!("delay must be non-negative, got {t0}")));
    }
    if (nt as f64) * dt <= 2.0 * t0 {
        log::warn!(
            "wavelet window {:.4}s does not cover 2*t0 = {:.4}s; source is truncated",
            nt as f64 * dt,
            2.0 * t0
        );
    }
    let pf = std::f64::consts::PI * f0;
    let samples = (0..nt)
        .map(|n| {
            let tau = n as f64 * dt - t0;
            let arg = pf * pf * tau * tau;
            (1.0 - 2.0 * arg) * (-arg).exp()
        })
        .collect();
    Ok(RickerWavelet { samples, dt, f0, t0 })
}
