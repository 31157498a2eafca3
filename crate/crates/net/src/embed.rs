use crate::{NetError, Result};

/// Sinusoidal position features for a scalar time `t`. The first half holds
/// `sin(t * mult * omega_i)`, the second half the matching cosines, with
/// geometric frequencies `omega_i = 10000^(-2i/dim)`. The multiplier spreads
/// `t` in [0, 1] across distinguishable phases.
pub fn time_embed(t: f64, dim: usize, multiplier: f64) -> Result<Vec<f64>> {
    if dim < 2 || dim % 2 != 0 {
        return Err(NetError::invalid(format!("embedding dim must be even and >= 2, got {dim}")));
    }
    let half = dim / 2;
    let mut out = vec![0.0; dim];
    for i in 0..half {
        let omega = 10000f64.powf(-2.0 * i as f64 / dim as f64);
        let phase = t * multiplier * omega;
        out[i] = phase.sin();
        out[half + i] = phase.cos();
    }
    Ok(out)
}
