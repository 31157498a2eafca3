use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use sfwi_core::VelocityModel;

use crate::{MetricsError, Result};

/// Wavenumber bands for the sharpness diagnostics, in cycles/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBands {
    /// Band-content ratio is summed over `[band_lo, band_hi]`.
    pub band_lo: f64,
    pub band_hi: f64,
    /// High-wavenumber fraction counts energy strictly above this cutoff.
    pub k_c: f64,
}

impl Default for SpectralBands {
    fn default() -> Self {
        SpectralBands { band_lo: 0.03, band_hi: 0.10, k_c: 0.0375 }
    }
}

/// Spectral and gradient sharpness comparison of a corrupted model against
/// its corrected version. Ratios are corrected over corrupted, so values
/// above 1 mean the correction restored content the corruption removed.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    /// Radial bin centers, increasing, cycles/m.
    pub wavenumbers: Vec<f64>,
    /// Radially summed energy spectra (|FFT|^2, DC excluded).
    pub spectrum_corrupt: Vec<f64>,
    pub spectrum_corrected: Vec<f64>,
    /// Band-limited spectral content ratio over `[band_lo, band_hi]`.
    pub r_band: f64,
    /// Ratio of the energy fractions above `k_c`.
    pub hf_gain: f64,
    /// Ratio of mean squared gradient magnitude.
    pub grad_energy_gain: f64,
    /// Ratio of 90th-percentile gradient magnitude.
    pub p90_grad_gain: f64,
}

impl SpectralReport {
    /// CSV with one `k,s_corrupt,s_corrected` row per radial bin and a
    /// final `summary` row carrying the four ratios in the order r_band,
    /// hf_gain, grad_energy_gain, p90_grad_gain.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,s_corrupt,s_corrected\n");
        for i in 0..self.wavenumbers.len() {
            out.push_str(&format!(
                "{:.6},{:.8e},{:.8e}\n",
                self.wavenumbers[i], self.spectrum_corrupt[i], self.spectrum_corrected[i]
            ));
        }
        out.push_str(&format!(
            "summary,{:.8e},{:.8e},{:.8e},{:.8e}\n",
            self.r_band, self.hf_gain, self.grad_energy_gain, self.p90_grad_gain
        ));
        out
    }
}

/// Compare spectral content and gradient sharpness of two models on the
/// same grid.
///
/// Energy spectra come from the 2D FFT with the DC bin excluded, which
/// makes every ratio invariant to adding a constant to both fields. Radial
/// bins have width `1 / (max(nx, nz) * dx)`. Gradient magnitudes use
/// forward differences with the edge sample replicated (zero difference on
/// the last row/column); the percentile is nearest-rank.
pub fn deblur_report(
    corrupt: &VelocityModel,
    corrected: &VelocityModel,
    bands: &SpectralBands,
) -> Result<SpectralReport> {
    if corrupt.grid() != corrected.grid() {
        return Err(MetricsError::invalid(format!(
            "grids differ: {:?} vs {:?}",
            corrupt.grid(),
            corrected.grid()
        )));
    }
    let grid = corrupt.grid();
    let nyquist = 0.5 / grid.dx.max(grid.dz);
    if !(bands.band_lo > 0.0) || !(bands.band_hi > bands.band_lo) {
        return Err(MetricsError::invalid(format!(
            "need 0 < band_lo < band_hi, got [{}, {}]",
            bands.band_lo, bands.band_hi
        )));
    }
    if bands.band_hi > nyquist {
        return Err(MetricsError::invalid(format!(
            "band_hi = {} cycles/m exceeds the Nyquist limit {} cycles/m for this grid",
            bands.band_hi, nyquist
        )));
    }
    if !(bands.k_c > 0.0) || bands.k_c >= nyquist {
        return Err(MetricsError::invalid(format!(
            "k_c = {} cycles/m must lie in (0, Nyquist = {} cycles/m)",
            bands.k_c, nyquist
        )));
    }

    let spec_corrupt = energy_spectrum(corrupt.values(), grid.dx, grid.dz);
    let spec_corrected = energy_spectrum(corrected.values(), grid.dx, grid.dz);

    let (nz, nx) = corrupt.values().dim();
    let bin_width = 1.0 / (nx.max(nz) as f64 * grid.dx);
    let k_max = (0.5 / grid.dx).hypot(0.5 / grid.dz);
    let n_bins = (k_max / bin_width).floor() as usize + 1;

    let mut binned_corrupt = vec![0.0; n_bins];
    let mut binned_corrected = vec![0.0; n_bins];
    let mut sums = BandSums::default();
    let mut sums_corrected = BandSums::default();
    for (cell, s_a) in spec_corrupt.iter().enumerate() {
        let (k, s_b) = (spec_corrupt_k(cell, nz, nx, grid.dx, grid.dz), spec_corrected[cell]);
        if k == 0.0 {
            continue;
        }
        let bin = ((k / bin_width) as usize).min(n_bins - 1);
        binned_corrupt[bin] += s_a;
        binned_corrected[bin] += s_b;
        sums.add(k, *s_a, bands);
        sums_corrected.add(k, s_b, bands);
    }

    let r_band = ratio(sums_corrected.band, sums.band, "band energy of the corrupted field")?;
    let hf_gain = ratio(
        sums_corrected.fraction_high()?,
        sums.fraction_high()?,
        "high-wavenumber fraction of the corrupted field",
    )?;

    let grads_corrupt = gradient_magnitudes(corrupt.values());
    let grads_corrected = gradient_magnitudes(corrected.values());
    let grad_energy_gain = ratio(
        mean_square(&grads_corrected),
        mean_square(&grads_corrupt),
        "gradient energy of the corrupted field",
    )?;
    let p90_grad_gain = ratio(
        percentile(&grads_corrected, 0.9),
        percentile(&grads_corrupt, 0.9),
        "90th-percentile gradient of the corrupted field",
    )?;

    let wavenumbers = (0..n_bins).map(|i| (i as f64 + 0.5) * bin_width).collect();
    Ok(SpectralReport {
        wavenumbers,
        spectrum_corrupt: binned_corrupt,
        spectrum_corrected: binned_corrected,
        r_band,
        hf_gain,
        grad_energy_gain,
        p90_grad_gain,
    })
}

#[derive(Default)]
struct BandSums {
    total: f64,
    band: f64,
    high: f64,
}

impl BandSums {
    fn add(&mut self, k: f64, s: f64, bands: &SpectralBands) {
        self.total += s;
        if k >= bands.band_lo && k <= bands.band_hi {
            self.band += s;
        }
        if k > bands.k_c {
            self.high += s;
        }
    }

    fn fraction_high(&self) -> Result<f64> {
        if self.total == 0.0 {
            return Err(MetricsError::Numeric(
                "field has no spectral content outside DC".to_string(),
            ));
        }
        Ok(self.high / self.total)
    }
}

fn ratio(num: f64, den: f64, what: &str) -> Result<f64> {
    if den == 0.0 {
        return Err(MetricsError::Numeric(format!("{what} is zero, ratio undefined")));
    }
    Ok(num / den)
}

/// |FFT|^2 of the field, row-major `(iz, ix)` cell order.
fn energy_spectrum(field: &Array2<f64>, _dx: f64, _dz: f64) -> Vec<f64> {
    let (nz, nx) = field.dim();
    let mut planner = FftPlanner::new();
    let fft_x = planner.plan_fft_forward(nx);
    let fft_z = planner.plan_fft_forward(nz);

    let mut buf: Vec<Complex<f64>> =
        field.iter().map(|&v| Complex::new(v, 0.0)).collect();
    for row in buf.chunks_exact_mut(nx) {
        fft_x.process(row);
    }
    // Columns: transpose, FFT rows of length nz, transpose back.
    let mut t: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); nz * nx];
    for iz in 0..nz {
        for ix in 0..nx {
            t[ix * nz + iz] = buf[iz * nx + ix];
        }
    }
    for col in t.chunks_exact_mut(nz) {
        fft_z.process(col);
    }
    let mut out = vec![0.0; nz * nx];
    for iz in 0..nz {
        for ix in 0..nx {
            out[iz * nx + ix] = t[ix * nz + iz].norm_sqr();
        }
    }
    out
}

/// Radial wavenumber of FFT cell `iz * nx + ix` in cycles/m.
fn spec_corrupt_k(cell: usize, nz: usize, nx: usize, dx: f64, dz: f64) -> f64 {
    let iz = cell / nx;
    let ix = cell % nx;
    let fx = signed_freq(ix, nx) / (nx as f64 * dx);
    let fz = signed_freq(iz, nz) / (nz as f64 * dz);
    fx.hypot(fz)
}

fn signed_freq(i: usize, n: usize) -> f64 {
    if i <= n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

/// Forward-difference gradient magnitude per cell; the edge sample is
/// replicated so the last row/column contribute zero difference.
fn gradient_magnitudes(field: &Array2<f64>) -> Vec<f64> {
    let (nz, nx) = field.dim();
    let mut out = Vec::with_capacity(nz * nx);
    for iz in 0..nz {
        for ix in 0..nx {
            let gx = if ix + 1 < nx { field[(iz, ix + 1)] - field[(iz, ix)] } else { 0.0 };
            let gz = if iz + 1 < nz { field[(iz + 1, ix)] - field[(iz, ix)] } else { 0.0 };
            out.push(gx.hypot(gz));
        }
    }
    out
}

fn mean_square(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64
}

/// Nearest-rank percentile, `q` in [0, 1].
fn percentile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("gradient magnitudes are finite"));
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

#[cfg(test)]
mod tests {
    use super::*;
    use sfwi_core::{gaussian_smooth, Grid2D};

    fn model(values: Array2<f64>, dx: f64) -> VelocityModel {
        let (nz, nx) = values.dim();
        VelocityModel::new(Grid2D::new(nx, nz, dx, dx).unwrap(), values).unwrap()
    }

    fn rough_field(n: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, n), |(iz, ix)| {
            let h = (iz as u64)
                .wrapping_mul(0x9E3779B97F4A7C15)
                .wrapping_add((ix as u64).wrapping_mul(0xBF58476D1CE4E5B9));
            let h = (h ^ (h >> 31)).wrapping_mul(0x94D049BB133111EB);
            2500.0 + 500.0 * (((h >> 11) as f64 / (1u64 << 53) as f64) - 0.5)
        })
    }

    #[test]
    fn identical_fields_give_unit_ratios() {
        let m = model(rough_field(48), 4.0);
        let r = deblur_report(&m, &m.clone(), &SpectralBands::default()).unwrap();
        for v in [r.r_band, r.hf_gain, r.grad_energy_gain, r.p90_grad_gain] {
            assert!((v - 1.0).abs() < 1e-9, "ratio {v} should be 1");
        }
        assert!(r.wavenumbers.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn smoothing_suppresses_band_and_high_frequencies() {
        let m = model(rough_field(48), 4.0);
        let blurred = gaussian_smooth(&m, 2.0).unwrap();
        // Corrupted = blurred, corrected = original sharp field.
        let r = deblur_report(&blurred, &m, &SpectralBands::default()).unwrap();
        assert!(r.r_band > 1.0, "sharp field should have more band content, r_band = {}", r.r_band);
        assert!(r.hf_gain > 1.0, "hf_gain = {}", r.hf_gain);
        assert!(r.grad_energy_gain > 1.0);
        assert!(r.p90_grad_gain > 1.0);
        // And the mirrored comparison shows suppression.
        let r2 = deblur_report(&m, &blurred, &SpectralBands::default()).unwrap();
        assert!(r2.r_band < 1.0);
        assert!(r2.hf_gain < 1.0);
    }

    #[test]
    fn added_checkerboard_raises_hf_gain() {
        let base = model(rough_field(48), 4.0);
        let smooth = gaussian_smooth(&base, 3.0).unwrap();
        let with_hf = VelocityModel::new(
            *smooth.grid(),
            Array2::from_shape_fn((48, 48), |(iz, ix)| {
                smooth.values()[(iz, ix)] + if (iz + ix) % 2 == 0 { 2.0 } else { -2.0 }
            }),
        )
        .unwrap();
        let r = deblur_report(&smooth, &with_hf, &SpectralBands::default()).unwrap();
        assert!(r.hf_gain > 1.0, "checkerboard is pure Nyquist content, hf_gain = {}", r.hf_gain);
    }

    #[test]
    fn ratios_invariant_to_constant_shift() {
        let a = model(rough_field(48), 4.0);
        let b = gaussian_smooth(&a, 1.0).unwrap();
        let r1 = deblur_report(&a, &b, &SpectralBands::default()).unwrap();
        let a2 = a.map(|v| v + 321.0).unwrap();
        let b2 = b.map(|v| v + 321.0).unwrap();
        let r2 = deblur_report(&a2, &b2, &SpectralBands::default()).unwrap();
        assert!((r1.r_band - r2.r_band).abs() < 1e-9 * r1.r_band);
        assert!((r1.hf_gain - r2.hf_gain).abs() < 1e-9 * r1.hf_gain);
        assert!((r1.grad_energy_gain - r2.grad_energy_gain).abs() < 1e-9);
        assert!((r1.p90_grad_gain - r2.p90_grad_gain).abs() < 1e-9);
    }

    #[test]
    fn band_beyond_nyquist_names_the_limit() {
        // dx = 10 m puts Nyquist at 0.05 cycles/m, below the default band.
        let m = model(rough_field(48), 10.0);
        let err = deblur_report(&m, &m.clone(), &SpectralBands::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Nyquist"), "message should name Nyquist: {msg}");
        assert!(msg.contains("0.05"), "message should give the limit: {msg}");
    }

    #[test]
    fn constant_corrupted_field_is_an_error() {
        let c = model(Array2::from_elem((48, 48), 2500.0), 4.0);
        let m = model(rough_field(48), 4.0);
        assert!(deblur_report(&c, &m, &SpectralBands::default()).is_err());
    }

    #[test]
    fn csv_has_per_bin_rows_and_summary() {
        let m = model(rough_field(48), 4.0);
        let b = gaussian_smooth(&m, 1.0).unwrap();
        let r = deblur_report(&m, &b, &SpectralBands::default()).unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,s_corrupt,s_corrected");
        assert_eq!(lines.len(), r.wavenumbers.len() + 2);
        assert!(lines.last().unwrap().starts_with("summary,"));
    }
}
