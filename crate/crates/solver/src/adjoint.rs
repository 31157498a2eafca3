//! Exact gradient of the data misfit with respect to the velocity model,
//! by reverse-mode differentiation of the discrete time loop.
//!
//! The forward update is linear in the wavefield, so the reverse pass only
//! needs the per-step spatial term `S^n` (not the wavefield itself): the
//! model enters through `u^{n+1} = ... + dt^2 m^2 S^n` and the source
//! injection, and the memory-variable recursions are linear with constant
//! coefficients. `S^n` is either stored for every step or recomputed in
//! segments from checkpoints; both paths produce bit-identical gradients
//! because the replay repeats the identical floating-point operations.

use ndarray::Array2;
use sfwi_core::{AcquisitionGeometry, RickerWavelet, ShotGather, VelocityModel};

use crate::config::SolverConfig;
use crate::forward::{
    advance, check_acquisition, run_shot, Axis, Problem, Recorder, Scratch, WavefieldState,
};
use crate::stencil::{self, HALF_WIDTH};
use crate::{map_shots, GradientField, Result, SolverError};

/// Forward misfit and its exact derivative with respect to each model cell.
///
/// Equals `d data_misfit(simulate_shots(model, ...), d_obs) / d model`
/// to rounding. A zero residual therefore yields an exactly zero gradient.
pub fn model_gradient(
    model: &VelocityModel,
    geom: &AcquisitionGeometry,
    wavelet: &RickerWavelet,
    d_obs: &ShotGather,
    cfg: &SolverConfig,
) -> Result<(f64, GradientField)> {
    check_acquisition(model, geom, wavelet, cfg)?;
    if d_obs.data.dim() != (geom.n_shots(), geom.n_receivers(), cfg.nt) {
        return Err(SolverError::invalid(format!(
            "observed gather shape {:?} does not match acquisition ({}, {}, {})",
            d_obs.data.dim(),
            geom.n_shots(),
            geom.n_receivers(),
            cfg.nt
        )));
    }
    if d_obs.dt != cfg.dt {
        return Err(SolverError::invalid(format!(
            "observed gather dt {} differs from solver dt {}",
            d_obs.dt, cfg.dt
        )));
    }
    let problem = Problem::new(model, cfg)?;
    check_history_budget(&problem, cfg)?;

    let grid = *model.grid();
    let per_shot = map_shots(geom.n_shots(), |s| {
        let d_obs_shot = d_obs.data.index_axis(ndarray::Axis(0), s);
        shot_gradient(&problem, cfg, geom.sources[s], &geom.receivers, wavelet, &d_obs_shot)
    })?;

    // Fixed-order reduction keeps the result identical at any thread count.
    let mut misfit = 0.0;
    let mut grad = Array2::zeros((grid.nz, grid.nx));
    for (m, g) in per_shot {
        misfit += m;
        grad += &g;
    }
    Ok((misfit, grad))
}

fn check_history_budget(p: &Problem, cfg: &SolverConfig) -> Result<()> {
    let array_bytes = p.npx * p.npz * std::mem::size_of::<f64>();
    let suggested = ((6.0 * cfg.nt as f64).sqrt().ceil() as usize).max(1);
    let needed = match cfg.checkpoint_interval {
        None => cfg.nt * array_bytes,
        Some(interval) => {
            let n_checkpoints = cfg.nt.div_ceil(interval);
            (6 * n_checkpoints + interval) * array_bytes
        }
    };
    if needed > cfg.max_history_bytes {
        return Err(SolverError::Resource {
            needed_bytes: needed,
            limit_bytes: cfg.max_history_bytes,
            suggested_interval: suggested,
        });
    }
    Ok(())
}

/// Stores S^n for every step.
struct FullHistory {
    s: Vec<Array2<f64>>,
}

impl Recorder for FullHistory {
    fn after_step(&mut self, _n: usize, s: &Array2<f64>, _state: &WavefieldState) {
        self.s.push(s.clone());
    }
}

/// Memory-variable state saved before selected steps, enough to replay a
/// segment exactly.
#[derive(Clone)]
struct Checkpoint {
    u_prev: Array2<f64>,
    u_curr: Array2<f64>,
    psi_x: Array2<f64>,
    xi_x: Array2<f64>,
    psi_z: Array2<f64>,
    xi_z: Array2<f64>,
}

impl Checkpoint {
    fn capture(state: &WavefieldState) -> Self {
        Checkpoint {
            u_prev: state.u_prev.clone(),
            u_curr: state.u_curr.clone(),
            psi_x: state.psi_x.clone(),
            xi_x: state.xi_x.clone(),
            psi_z: state.psi_z.clone(),
            xi_z: state.xi_z.clone(),
        }
    }

    fn restore(&self, npz: usize, npx: usize) -> WavefieldState {
        WavefieldState {
            u_prev: self.u_prev.clone(),
            u_curr: self.u_curr.clone(),
            u_next: Array2::zeros((npz, npx)),
            psi_x: self.psi_x.clone(),
            xi_x: self.xi_x.clone(),
            psi_z: self.psi_z.clone(),
            xi_z: self.xi_z.clone(),
        }
    }
}

struct CheckpointHistory {
    interval: usize,
    checkpoints: Vec<Checkpoint>,
}

impl Recorder for CheckpointHistory {
    fn before_step(&mut self, n: usize, state: &WavefieldState) {
        if n % self.interval == 0 {
            self.checkpoints.push(Checkpoint::capture(state));
        }
    }
}

/// Cotangent state of the reverse sweep for one shot.
struct AdjointState {
    /// Cotangent of u^{n+1} (complete once the residual is injected).
    cu1: Array2<f64>,
    /// Cotangent of u^n, partial (contributions from steps > n).
    cu2: Array2<f64>,
    /// Cotangent of u^{n-1}, partial.
    cu3: Array2<f64>,
    cpsi_x: Array2<f64>,
    cxi_x: Array2<f64>,
    cpsi_z: Array2<f64>,
    cxi_z: Array2<f64>,
    /// Cotangent of S^n.
    cs: Array2<f64>,
    ch: Array2<f64>,
    cg: Array2<f64>,
    t: Array2<f64>,
    /// Gradient accumulator on the padded grid.
    mbar: Array2<f64>,
}

impl AdjointState {
    fn zeros(npz: usize, npx: usize) -> Self {
        let z = || Array2::zeros((npz, npx));
        AdjointState {
            cu1: z(),
            cu2: z(),
            cu3: z(),
            cpsi_x: z(),
            cxi_x: z(),
            cpsi_z: z(),
            cxi_z: z(),
            cs: z(),
            ch: z(),
            cg: z(),
            t: z(),
            mbar: z(),
        }
    }

    fn rotate(&mut self) {
        std::mem::swap(&mut self.cu1, &mut self.cu2);
        std::mem::swap(&mut self.cu2, &mut self.cu3);
        self.cu3.fill(0.0);
    }
}

/// Reverse one time step. `s_n` is the forward spatial term of step `n`;
/// `resid_n[r]` the residual trace sample recorded at that step.
#[allow(clippy::too_many_arguments)]
fn reverse_step(
    p: &Problem,
    a: &mut AdjointState,
    s_n: &Array2<f64>,
    wn: f64,
    src_p: (usize, usize),
    recv_p: &[(usize, usize)],
    resid_n: &[f64],
) {
    // Traces read u^{n+1} at the receivers: inject the residual cotangent.
    for (r, &pos) in recv_p.iter().enumerate() {
        a.cu1[pos] += resid_n[r];
    }

    // u^{n+1} = 2 u^n - u^{n-1} + dt^2 m^2 S^n + delta_src w^n dt^2 m^2/(dx dz)
    {
        let (npz, npx) = (p.npz, p.npx);
        let cu1 = a.cu1.as_slice().expect("contiguous");
        let cu2 = a.cu2.as_slice_mut().expect("contiguous");
        let cu3 = a.cu3.as_slice_mut().expect("contiguous");
        let cs = a.cs.as_slice_mut().expect("contiguous");
        let mbar = a.mbar.as_slice_mut().expect("contiguous");
        let m_pad = p.m_pad.as_slice().expect("contiguous");
        let m2dt2 = p.m2dt2.as_slice().expect("contiguous");
        let s = s_n.as_slice().expect("contiguous");
        let two_dt2 = 2.0 * p.dt2;
        for iz in HALF_WIDTH..npz - HALF_WIDTH {
            let base = iz * npx;
            for ix in HALF_WIDTH..npx - HALF_WIDTH {
                let i = base + ix;
                let c = cu1[i];
                mbar[i] += c * two_dt2 * m_pad[i] * s[i];
                cs[i] = m2dt2[i] * c;
                cu2[i] += 2.0 * c;
                cu3[i] -= c;
            }
        }
    }
    a.mbar[src_p] += a.cu1[src_p] * 2.0 * wn * p.dt2 * p.m_pad[src_p] * p.inv_cell_area;

    // Reverse each axis: S = (D2 u + D1 psi) + xi, psi/xi are geometric
    // recursions with coefficients (a, b). D2 is symmetric and D1
    // antisymmetric on zero-padded support, so their transposes are D2 and
    // -D1.
    reverse_axis(
        p,
        &mut a.cxi_x,
        &mut a.cpsi_x,
        &mut a.ch,
        &mut a.cg,
        &mut a.t,
        &mut a.cu2,
        &a.cs,
        Axis::X,
    );
    reverse_axis(
        p,
        &mut a.cxi_z,
        &mut a.cpsi_z,
        &mut a.ch,
        &mut a.cg,
        &mut a.t,
        &mut a.cu2,
        &a.cs,
        Axis::Z,
    );

    a.rotate();
}

#[allow(clippy::too_many_arguments)]
fn reverse_axis(
    p: &Problem,
    cxi: &mut Array2<f64>,
    cpsi: &mut Array2<f64>,
    ch: &mut Array2<f64>,
    cg: &mut Array2<f64>,
    t: &mut Array2<f64>,
    cu2: &mut Array2<f64>,
    cs: &Array2<f64>,
    axis: Axis,
) {
    let profile = match axis {
        Axis::X => &p.px,
        Axis::Z => &p.pz,
    };
    let (inv_d, inv_d2) = match axis {
        Axis::X => (p.inv_dx, p.inv_dx2),
        Axis::Z => (p.inv_dz, p.inv_dz2),
    };

    // xi_bar^n = cxi (from the future) + cs (from S = h + xi);
    // ch = cs + a*xi_bar (h feeds both S directly and xi's update);
    // cxi for the previous step = b * xi_bar.
    add_assign(cxi, cs);
    {
        let (npz, npx) = (p.npz, p.npx);
        let ch = ch.as_slice_mut().expect("contiguous");
        let cs = cs.as_slice().expect("contiguous");
        let cxi = cxi.as_slice().expect("contiguous");
        match axis {
            Axis::X => {
                for iz in HALF_WIDTH..npz - HALF_WIDTH {
                    let base = iz * npx;
                    for ix in HALF_WIDTH..npx - HALF_WIDTH {
                        let i = base + ix;
                        ch[i] = cs[i] + profile.a[ix] * cxi[i];
                    }
                }
            }
            Axis::Z => {
                for iz in HALF_WIDTH..npz - HALF_WIDTH {
                    let base = iz * npx;
                    let av = profile.a[iz];
                    for ix in HALF_WIDTH..npx - HALF_WIDTH {
                        let i = base + ix;
                        ch[i] = cs[i] + av * cxi[i];
                    }
                }
            }
        }
    }
    scale_by_profile(cxi, profile, &axis);

    // psi_bar^n = cpsi (future) + D1^T ch; cg = a * psi_bar feeds the
    // first-derivative read of u; cpsi for the previous step = b * psi_bar.
    match axis {
        Axis::X => stencil::d1x(t, ch, -inv_d),
        Axis::Z => stencil::d1z(t, ch, -inv_d),
    }
    add_assign(cpsi, t);
    multiply_by_profile(cg, cpsi, profile, &axis);
    scale_by_profile(cpsi, profile, &axis);

    // u^n feeds h through D2 and psi's update through D1.
    match axis {
        Axis::X => {
            stencil::d2x(t, ch, inv_d2);
            add_assign(cu2, t);
            stencil::d1x(t, cg, -inv_d);
            add_assign(cu2, t);
        }
        Axis::Z => {
            stencil::d2z(t, ch, inv_d2);
            add_assign(cu2, t);
            stencil::d1z(t, cg, -inv_d);
            add_assign(cu2, t);
        }
    }
}

fn add_assign(out: &mut Array2<f64>, rhs: &Array2<f64>) {
    let out = out.as_slice_mut().expect("contiguous");
    let rhs = rhs.as_slice().expect("contiguous");
    for i in 0..out.len() {
        out[i] += rhs[i];
    }
}

fn scale_by_profile(mem: &mut Array2<f64>, profile: &crate::pml::AxisProfile, axis: &Axis) {
    let (nz, nx) = mem.dim();
    let mem = mem.as_slice_mut().expect("contiguous");
    match axis {
        Axis::X => {
            for iz in HALF_WIDTH..nz - HALF_WIDTH {
                let base = iz * nx;
                for ix in HALF_WIDTH..nx - HALF_WIDTH {
                    mem[base + ix] *= profile.b[ix];
                }
            }
        }
        Axis::Z => {
            for iz in HALF_WIDTH..nz - HALF_WIDTH {
                let base = iz * nx;
                let bv = profile.b[iz];
                for ix in HALF_WIDTH..nx - HALF_WIDTH {
                    mem[base + ix] *= bv;
                }
            }
        }
    }
}

fn multiply_by_profile(
    out: &mut Array2<f64>,
    input: &Array2<f64>,
    profile: &crate::pml::AxisProfile,
    axis: &Axis,
) {
    let (nz, nx) = out.dim();
    let out = out.as_slice_mut().expect("contiguous");
    let input = input.as_slice().expect("contiguous");
    match axis {
        Axis::X => {
            for iz in HALF_WIDTH..nz - HALF_WIDTH {
                let base = iz * nx;
                for ix in HALF_WIDTH..nx - HALF_WIDTH {
                    out[base + ix] = profile.a[ix] * input[base + ix];
                }
            }
        }
        Axis::Z => {
            for iz in HALF_WIDTH..nz - HALF_WIDTH {
                let base = iz * nx;
                let av = profile.a[iz];
                for ix in HALF_WIDTH..nx - HALF_WIDTH {
                    out[base + ix] = av * input[base + ix];
                }
            }
        }
    }
}

/// Misfit and interior gradient for one shot.
fn shot_gradient(
    p: &Problem,
    cfg: &SolverConfig,
    source: (usize, usize),
    receivers: &[(usize, usize)],
    wavelet: &RickerWavelet,
    d_obs_shot: &ndarray::ArrayView2<f64>,
) -> Result<(f64, Array2<f64>)> {
    let src_p = p.padded_pos(source);
    let recv_p: Vec<(usize, usize)> = receivers.iter().map(|&r| p.padded_pos(r)).collect();

    // Forward pass, capturing what the reverse sweep needs.
    enum History {
        Full(Vec<Array2<f64>>),
        Segments { interval: usize, checkpoints: Vec<Checkpoint> },
    }
    let (traces, history) = match cfg.checkpoint_interval {
        None => {
            let mut rec = FullHistory { s: Vec::with_capacity(cfg.nt) };
            let traces = run_shot(p, source, receivers, &wavelet.samples, &mut rec)?;
            (traces, History::Full(rec.s))
        }
        Some(interval) => {
            let mut rec = CheckpointHistory { interval, checkpoints: Vec::new() };
            let traces = run_shot(p, source, receivers, &wavelet.samples, &mut rec)?;
            (traces, History::Segments { interval, checkpoints: rec.checkpoints })
        }
    };

    let residual = &traces - d_obs_shot;
    let misfit = 0.5 * residual.iter().map(|r| r * r).sum::<f64>();

    let mut adj = AdjointState::zeros(p.npz, p.npx);
    let resid_at = |n: usize| -> Vec<f64> { (0..recv_p.len()).map(|r| residual[(r, n)]).collect() };

    match history {
        History::Full(s_hist) => {
            for n in (0..cfg.nt).rev() {
                reverse_step(p, &mut adj, &s_hist[n], wavelet.samples[n], src_p, &recv_p, &resid_at(n));
            }
        }
        History::Segments { interval, checkpoints } => {
            let mut sc = Scratch::zeros(p.npz, p.npx);
            let mut seg_s: Vec<Array2<f64>> = Vec::with_capacity(interval);
            for (seg, checkpoint) in checkpoints.iter().enumerate().rev() {
                let c0 = seg * interval;
                let c1 = (c0 + interval).min(cfg.nt);
                // Replay [c0, c1) to regenerate the spatial terms exactly.
                let mut st = checkpoint.restore(p.npz, p.npx);
                seg_s.clear();
                for n in c0..c1 {
                    advance(p, &mut st, &mut sc, wavelet.samples[n], src_p, n)?;
                    seg_s.push(sc.s.clone());
                    st.rotate();
                }
                for n in (c0..c1).rev() {
                    reverse_step(
                        p,
                        &mut adj,
                        &seg_s[n - c0],
                        wavelet.samples[n],
                        src_p,
                        &recv_p,
                        &resid_at(n),
                    );
                }
            }
        }
    }

    // Fold the padded gradient onto the interior: replicated pad cells
    // share their interior source cell, so their contributions sum there.
    let (nz, nx) = (p.npz - 2 * p.pad, p.npx - 2 * p.pad);
    let mut grad = Array2::zeros((nz, nx));
    for izp in HALF_WIDTH..p.npz - HALF_WIDTH {
        let iz = izp.saturating_sub(p.pad).min(nz - 1);
        for ixp in HALF_WIDTH..p.npx - HALF_WIDTH {
            let ix = ixp.saturating_sub(p.pad).min(nx - 1);
            grad[(iz, ix)] += adj.mbar[(izp, ixp)];
        }
    }
    Ok((misfit, grad))
}
