//! Forward and reverse kernels for every differentiable primitive. Each
//! backward takes the output cotangent and accumulates (`+=`) into the
//! input cotangents, so fan-out sums naturally.

/// 2D convolution, stride 1, zero padding `pad` on each side.
/// x: [C, H, W], w: [O, C, K, K], b: [O] -> y: [O, H', W'] with
/// H' = H + 2 pad - K + 1.
pub fn conv2d(
    x: &[f64],
    (c_in, h, w): (usize, usize, usize),
    weight: &[f64],
    (c_out, k): (usize, usize),
    bias: &[f64],
    pad: usize,
) -> (Vec<f64>, (usize, usize, usize)) {
    let ho = h + 2 * pad + 1 - k;
    let wo = w + 2 * pad + 1 - k;
    let mut y = vec![0.0; c_out * ho * wo];
    for oc in 0..c_out {
        let yo = &mut y[oc * ho * wo..(oc + 1) * ho * wo];
        yo.fill(bias[oc]);
        for ic in 0..c_in {
            let xi = &x[ic * h * w..(ic + 1) * h * w];
            let wb = &weight[(oc * c_in + ic) * k * k..(oc * c_in + ic + 1) * k * k];
            for ky in 0..k {
                for kx in 0..k {
                    let wv = wb[ky * k + kx];
                    // y[oy, ox] += wv * x[oy + ky - pad, ox + kx - pad]
                    let (ox_lo, ox_hi) = x_range(wo, w, kx, pad);
                    for oy in 0..ho {
                        let iy = (oy + ky).wrapping_sub(pad);
                        if iy >= h {
                            continue;
                        }
                        let yrow = &mut yo[oy * wo..(oy + 1) * wo];
                        let xrow = &xi[iy * w..(iy + 1) * w];
                        for ox in ox_lo..ox_hi {
                            yrow[ox] += wv * xrow[ox + kx - pad];
                        }
                    }
                }
            }
        }
    }
    (y, (c_out, ho, wo))
}

/// Valid output column range for kernel offset kx with padding pad:
/// requires 0 <= ox + kx - pad < w.
fn x_range(wo: usize, w: usize, kx: usize, pad: usize) -> (usize, usize) {
    let lo = pad.saturating_sub(kx);
    let hi = (w + pad - kx).min(wo);
    (lo.min(hi), hi)
}

pub fn conv2d_backward(
    x: &[f64],
    (c_in, h, w): (usize, usize, usize),
    weight: &[f64],
    (c_out, k): (usize, usize),
    pad: usize,
    gy: &[f64],
    gx: &mut [f64],
    gw: &mut [f64],
    gb: &mut [f64],
) {
    let ho = h + 2 * pad + 1 - k;
    let wo = w + 2 * pad + 1 - k;
    for oc in 0..c_out {
        let gyo = &gy[oc * ho * wo..(oc + 1) * ho * wo];
        gb[oc] += gyo.iter().sum::<f64>();
        for ic in 0..c_in {
            let xi = &x[ic * h * w..(ic + 1) * h * w];
            let gxi = &mut gx[ic * h * w..(ic + 1) * h * w];
            let wb = &weight[(oc * c_in + ic) * k * k..(oc * c_in + ic + 1) * k * k];
            let gwb = &mut gw[(oc * c_in + ic) * k * k..(oc * c_in + ic + 1) * k * k];
            for ky in 0..k {
                for kx in 0..k {
                    let wv = wb[ky * k + kx];
                    let mut acc = 0.0;
                    let (ox_lo, ox_hi) = x_range(wo, w, kx, pad);
                    for oy in 0..ho {
                        let iy = (oy + ky).wrapping_sub(pad);
                        if iy >= h {
                            continue;
                        }
                        let gyrow = &gyo[oy * wo..(oy + 1) * wo];
                        let xrow = &xi[iy * w..(iy + 1) * w];
                        let gxrow = &mut gxi[iy * w..(iy + 1) * w];
                        for ox in ox_lo..ox_hi {
                            let ix = ox + kx - pad;
                            let g = gyrow[ox];
                            acc += g * xrow[ix];
                            gxrow[ix] += g * wv;
                        }
                    }
                    gwb[ky * k + kx] += acc;
                }
            }
        }
    }
}

/// Group normalization over `[C, H, W]` with per-channel affine transform.
/// Returns the output plus per-group (mean, inv_std) for the backward pass.
pub fn group_norm(
    x: &[f64],
    (c, h, w): (usize, usize, usize),
    gamma: &[f64],
    beta: &[f64],
    groups: usize,
    eps: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let cg = c / groups;
    let n = cg * h * w;
    let mut y = vec![0.0; c * h * w];
    let mut means = vec![0.0; groups];
    let mut inv_stds = vec![0.0; groups];
    for g in 0..groups {
        let xs = &x[g * n..(g + 1) * n];
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let inv_std = 1.0 / (var + eps).sqrt();
        means[g] = mean;
        inv_stds[g] = inv_std;
        for lc in 0..cg {
            let ch = g * cg + lc;
            let (ga, be) = (gamma[ch], beta[ch]);
            let xs_c = &x[ch * h * w..(ch + 1) * h * w];
            let ys_c = &mut y[ch * h * w..(ch + 1) * h * w];
            for i in 0..h * w {
                ys_c[i] = ga * (xs_c[i] - mean) * inv_std + be;
            }
        }
    }
    (y, means, inv_stds)
}

#[allow(clippy::too_many_arguments)]
pub fn group_norm_backward(
    x: &[f64],
    (c, h, w): (usize, usize, usize),
    gamma: &[f64],
    groups: usize,
    means: &[f64],
    inv_stds: &[f64],
    gy: &[f64],
    gx: &mut [f64],
    ggamma: &mut [f64],
    gbeta: &mut [f64],
) {
    let cg = c / groups;
    let n = cg * h * w;
    for g in 0..groups {
        let (mean, inv_std) = (means[g], inv_stds[g]);
        // Accumulate the two group-wide sums of the normalized-input chain.
        let mut sum_ghat = 0.0;
        let mut sum_ghat_xhat = 0.0;
        for lc in 0..cg {
            let ch = g * cg + lc;
            let ga = gamma[ch];
            let xs = &x[ch * h * w..(ch + 1) * h * w];
            let gys = &gy[ch * h * w..(ch + 1) * h * w];
            let mut s_y = 0.0;
            let mut s_yx = 0.0;
            for i in 0..h * w {
                let xhat = (xs[i] - mean) * inv_std;
                s_y += gys[i];
                s_yx += gys[i] * xhat;
                sum_ghat += ga * gys[i];
                sum_ghat_xhat += ga * gys[i] * xhat;
            }
            gbeta[ch] += s_y;
            ggamma[ch] += s_yx;
        }
        let inv_n = 1.0 / n as f64;
        for lc in 0..cg {
            let ch = g * cg + lc;
            let ga = gamma[ch];
            let xs = &x[ch * h * w..(ch + 1) * h * w];
            let gys = &gy[ch * h * w..(ch + 1) * h * w];
            let gxs = &mut gx[ch * h * w..(ch + 1) * h * w];
            for i in 0..h * w {
                let xhat = (xs[i] - mean) * inv_std;
                let ghat = ga * gys[i];
                gxs[i] +=
                    inv_std * (ghat - inv_n * sum_ghat - xhat * inv_n * sum_ghat_xhat);
            }
        }
    }
}

pub fn silu(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let s = 1.0 / (1.0 + (-v).exp());
            v * s
        })
        .collect()
}

pub fn silu_backward(x: &[f64], gy: &[f64], gx: &mut [f64]) {
    for i in 0..x.len() {
        let s = 1.0 / (1.0 + (-x[i]).exp());
        gx[i] += gy[i] * (s + x[i] * s * (1.0 - s));
    }
}

/// y = W x + b with W: [d_out, d_in], x: [d_in], b: [d_out].
pub fn linear(x: &[f64], weight: &[f64], bias: &[f64], d_out: usize) -> Vec<f64> {
    let d_in = x.len();
    let mut y = vec![0.0; d_out];
    for o in 0..d_out {
        let row = &weight[o * d_in..(o + 1) * d_in];
        y[o] = bias[o] + row.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>();
    }
    y
}

pub fn linear_backward(
    x: &[f64],
    weight: &[f64],
    d_out: usize,
    gy: &[f64],
    gx: &mut [f64],
    gw: &mut [f64],
    gb: &mut [f64],
) {
    let d_in = x.len();
    for o in 0..d_out {
        let g = gy[o];
        gb[o] += g;
        let row = &weight[o * d_in..(o + 1) * d_in];
        let grow = &mut gw[o * d_in..(o + 1) * d_in];
        for i in 0..d_in {
            grow[i] += g * x[i];
            gx[i] += g * row[i];
        }
    }
}

/// Nearest-neighbor spatial upsampling by 2 in both directions.
pub fn upsample2(x: &[f64], (c, h, w): (usize, usize, usize)) -> Vec<f64> {
    let (ho, wo) = (2 * h, 2 * w);
    let mut y = vec![0.0; c * ho * wo];
    for ch in 0..c {
        for iy in 0..h {
            for ix in 0..w {
                let v = x[(ch * h + iy) * w + ix];
                let base = (ch * ho + 2 * iy) * wo + 2 * ix;
                y[base] = v;
                y[base + 1] = v;
                y[base + wo] = v;
                y[base + wo + 1] = v;
            }
        }
    }
    y
}

pub fn upsample2_backward(gy: &[f64], (c, h, w): (usize, usize, usize), gx: &mut [f64]) {
    let (ho, wo) = (2 * h, 2 * w);
    for ch in 0..c {
        for iy in 0..h {
            for ix in 0..w {
                let base = (ch * ho + 2 * iy) * wo + 2 * ix;
                gx[(ch * h + iy) * w + ix] += gy[base] + gy[base + 1] + gy[base + wo] + gy[base + wo + 1];
            }
        }
    }
}

/// 2x2 mean pooling with stride 2. Requires even height and width.
pub fn downsample2(x: &[f64], (c, h, w): (usize, usize, usize)) -> Vec<f64> {
    let (ho, wo) = (h / 2, w / 2);
    let mut y = vec![0.0; c * ho * wo];
    for ch in 0..c {
        for oy in 0..ho {
            for ox in 0..wo {
                let base = (ch * h + 2 * oy) * w + 2 * ox;
                y[(ch * ho + oy) * wo + ox] =
                    0.25 * (x[base] + x[base + 1] + x[base + w] + x[base + w + 1]);
            }
        }
    }
    y
}

pub fn downsample2_backward(gy: &[f64], (c, h, w): (usize, usize, usize), gx: &mut [f64]) {
    let (ho, wo) = (h / 2, w / 2);
    for ch in 0..c {
        for oy in 0..ho {
            for ox in 0..wo {
                let g = 0.25 * gy[(ch * ho + oy) * wo + ox];
                let base = (ch * h + 2 * oy) * w + 2 * ox;
                gx[base] += g;
                gx[base + 1] += g;
                gx[base + w] += g;
                gx[base + w + 1] += g;
            }
        }
    }
}

/// Zero-pad a `[C, H, W]` map to `[C, H + top + bottom, W + left + right]`.
pub fn pad2d(
    x: &[f64],
    (c, h, w): (usize, usize, usize),
    (top, bottom, left, right): (usize, usize, usize, usize),
) -> Vec<f64> {
    let (ho, wo) = (h + top + bottom, w + left + right);
    let mut y = vec![0.0; c * ho * wo];
    for ch in 0..c {
        for iy in 0..h {
            let src = &x[(ch * h + iy) * w..(ch * h + iy + 1) * w];
            let dst = &mut y[(ch * ho + iy + top) * wo + left..(ch * ho + iy + top) * wo + left + w];
            dst.copy_from_slice(src);
        }
    }
    y
}

pub fn pad2d_backward(
    gy: &[f64],
    (c, h, w): (usize, usize, usize),
    (top, bottom, left, right): (usize, usize, usize, usize),
    gx: &mut [f64],
) {
    let wo = w + left + right;
    let ho = h + top + bottom;
    for ch in 0..c {
        for iy in 0..h {
            let src = &gy[(ch * ho + iy + top) * wo + left..(ch * ho + iy + top) * wo + left + w];
            let dst = &mut gx[(ch * h + iy) * w..(ch * h + iy + 1) * w];
            for i in 0..w {
                dst[i] += src[i];
            }
        }
    }
}

/// Crop a `[C, H, W]` map to the window starting at (top, left).
pub fn crop2d(
    x: &[f64],
    (c, h, w): (usize, usize, usize),
    (top, left): (usize, usize),
    (ho, wo): (usize, usize),
) -> Vec<f64> {
    let mut y = vec![0.0; c * ho * wo];
    for ch in 0..c {
        for oy in 0..ho {
            let src = &x[(ch * h + oy + top) * w + left..(ch * h + oy + top) * w + left + wo];
            y[(ch * ho + oy) * wo..(ch * ho + oy + 1) * wo].copy_from_slice(src);
        }
    }
    y
}

pub fn crop2d_backward(
    gy: &[f64],
    (c, h, w): (usize, usize, usize),
    (top, left): (usize, usize),
    (ho, wo): (usize, usize),
    gx: &mut [f64],
) {
    for ch in 0..c {
        for oy in 0..ho {
            let src = &gy[(ch * ho + oy) * wo..(ch * ho + oy + 1) * wo];
            let dst_off = (ch * h + oy + top) * w + left;
            let dst = &mut gx[dst_off..dst_off + wo];
            for i in 0..wo {
                dst[i] += src[i];
            }
        }
    }
}
