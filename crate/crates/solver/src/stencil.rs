//! Eighth-order centered difference stencils on padded fields.
//!
//! All operators write only the updatable region `[HALF_WIDTH, n - HALF_WIDTH)`
//! in both axes and read the full padded array; the outer `HALF_WIDTH`-cell
//! ghost frame acts as a zero Dirichlet boundary. Because the second
//! derivative is symmetric and the first antisymmetric, their transposes on
//! zero-padded input are `D2` itself and `-D1`, which the adjoint pass
//! relies on.

use ndarray::Array2;

/// Stencil half width; also the ghost frame thickness.
pub const HALF_WIDTH: usize = 4;

/// Second-derivative coefficients for offsets -4..=4.
pub const D2: [f64; 9] = [
    -1.0 / 560.0,
    8.0 / 315.0,
    -1.0 / 5.0,
    8.0 / 5.0,
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// First-derivative coefficients for offsets 1..=4 (antisymmetric).
pub const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

/// Sum of |D2| coefficients, the stability constant of the scheme.
pub const D2_ABS_SUM: f64 = 205.0 / 72.0 + 2.0 * (8.0 / 5.0 + 1.0 / 5.0 + 8.0 / 315.0 + 1.0 / 560.0);

/// `out = d^2 u / dx^2` over the updatable region. `scale` folds in
/// `1/dx^2` (and any sign for the transpose use).
pub fn d2x(out: &mut Array2<f64>, u: &Array2<f64>, scale: f64) {
    let (nz, nx) = u.dim();
    let c: Vec<f64> = D2.iter().map(|v| v * scale).collect();
    for iz in HALF_WIDTH..nz - HALF_WIDTH {
        let row = u.row(iz);
        let row = row.as_slice().expect("padded fields are contiguous");
        let mut out_row = out.row_mut(iz);
        let out_row = out_row.as_slice_mut().expect("padded fields are contiguous");
        for ix in HALF_WIDTH..nx - HALF_WIDTH {
            let mut acc = c[4] * row[ix];
            for k in 1..=HALF_WIDTH {
                acc += c[4 + k] * (row[ix + k] + row[ix - k]);
            }
            out_row[ix] = acc;
        }
    }
}

/// `out = d^2 u / dz^2` over the updatable region.
pub fn d2z(out: &mut Array2<f64>, u: &Array2<f64>, scale: f64) {
    let (nz, nx) = u.dim();
    let c: Vec<f64> = D2.iter().map(|v| v * scale).collect();
    let flat = u.as_slice().expect("padded fields are contiguous");
    for iz in HALF_WIDTH..nz - HALF_WIDTH {
        let base = iz * nx;
        let mut out_row = out.row_mut(iz);
        let out_row = out_row.as_slice_mut().expect("padded fields are contiguous");
        for ix in HALF_WIDTH..nx - HALF_WIDTH {
            let mut acc = c[4] * flat[base + ix];
            for k in 1..=HALF_WIDTH {
                acc += c[4 + k] * (flat[base + k * nx + ix] + flat[base - k * nx + ix]);
            }
            out_row[ix] = acc;
        }
    }
}

/// `out = d u / dx` over the updatable region; `scale` folds in `1/dx`.
/// Passing a negated scale gives the transpose.
pub fn d1x(out: &mut Array2<f64>, u: &Array2<f64>, scale: f64) {
    let (nz, nx) = u.dim();
    let c: Vec<f64> = D1.iter().map(|v| v * scale).collect();
    for iz in HALF_WIDTH..nz - HALF_WIDTH {
        let row = u.row(iz);
        let row = row.as_slice().expect("padded fields are contiguous");
        let mut out_row = out.row_mut(iz);
        let out_row = out_row.as_slice_mut().expect("padded fields are contiguous");
        for ix in HALF_WIDTH..nx - HALF_WIDTH {
            let mut acc = 0.0;
            for k in 1..=HALF_WIDTH {
                acc += c[k - 1] * (row[ix + k] - row[ix - k]);
            }
            out_row[ix] = acc;
        }
    }
}

/// `out = d u / dz` over the updatable region; `scale` folds in `1/dz`.
pub fn d1z(out: &mut Array2<f64>, u: &Array2<f64>, scale: f64) {
    let (nz, nx) = u.dim();
    let c: Vec<f64> = D1.iter().map(|v| v * scale).collect();
    let flat = u.as_slice().expect("padded fields are contiguous");
    for iz in HALF_WIDTH..nz - HALF_WIDTH {
        let base = iz * nx;
        let mut out_row = out.row_mut(iz);
        let out_row = out_row.as_slice_mut().expect("padded fields are contiguous");
        for ix in HALF_WIDTH..nx - HALF_WIDTH {
            let mut acc = 0.0;
            for k in 1..=HALF_WIDTH {
                acc += c[k - 1] * (flat[base + k * nx + ix] - flat[base - k * nx + ix]);
            }
            out_row[ix] = acc;
        }
    }
}
