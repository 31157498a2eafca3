use ndarray::{Array2, Array3};
use sfwi_core::{AcquisitionGeometry, RickerWavelet, ShotGather, VelocityModel};

use crate::config::SolverConfig;
use crate::pml::{axis_profile, AxisProfile};
use crate::stencil::{self, HALF_WIDTH};
use crate::{map_shots, Result, SolverError};

/// Pressure at three time levels plus the PML memory fields, all on the
/// padded grid. `u_curr` is u^n, `u_prev` is u^{n-1}; a step writes u^{n+1}
/// into `u_next` and rotates.
#[derive(Debug, Clone)]
pub struct WavefieldState {
    pub u_prev: Array2<f64>,
    pub u_curr: Array2<f64>,
    pub u_next: Array2<f64>,
    pub psi_x: Array2<f64>,
    pub xi_x: Array2<f64>,
    pub psi_z: Array2<f64>,
    pub xi_z: Array2<f64>,
}

impl WavefieldState {
    pub(crate) fn zeros(npz: usize, npx: usize) -> Self {
        WavefieldState {
            u_prev: Array2::zeros((npz, npx)),
            u_curr: Array2::zeros((npz, npx)),
            u_next: Array2::zeros((npz, npx)),
            psi_x: Array2::zeros((npz, npx)),
            xi_x: Array2::zeros((npz, npx)),
            psi_z: Array2::zeros((npz, npx)),
            xi_z: Array2::zeros((npz, npx)),
        }
    }

    pub(crate) fn rotate(&mut self) {
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
        std::mem::swap(&mut self.u_curr, &mut self.u_next);
    }
}

/// Velocity-dependent quantities and absorbing profiles on the padded
/// grid, shared read-only across shots.
pub(crate) struct Problem {
    pub npx: usize,
    pub npz: usize,
    pub pad: usize,
    pub m_pad: Array2<f64>,
    /// dt^2 * m^2, the factor in front of the spatial term and the source.
    pub m2dt2: Array2<f64>,
    pub px: AxisProfile,
    pub pz: AxisProfile,
    pub inv_dx: f64,
    pub inv_dx2: f64,
    pub inv_dz: f64,
    pub inv_dz2: f64,
    pub dt2: f64,
    pub inv_cell_area: f64,
    pub nt: usize,
}

impl Problem {
    pub(crate) fn new(model: &VelocityModel, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate(model)?;
        let grid = model.grid();
        let pad = cfg.pad();
        let npx = grid.nx + 2 * pad;
        let npz = grid.nz + 2 * pad;

        // Velocity continues into the padding by edge replication.
        let m = model.values();
        let m_pad = Array2::from_shape_fn((npz, npx), |(izp, ixp)| {
            let iz = izp.saturating_sub(pad).min(grid.nz - 1);
            let ix = ixp.saturating_sub(pad).min(grid.nx - 1);
            m[(iz, ix)]
        });
        let dt2 = cfg.dt * cfg.dt;
        let m2dt2 = m_pad.mapv(|v| v * v * dt2);

        Ok(Problem {
            npx,
            npz,
            pad,
            m_pad,
            m2dt2,
            px: axis_profile(npx, grid.dx, cfg),
            pz: axis_profile(npz, grid.dz, cfg),
            inv_dx: 1.0 / grid.dx,
            inv_dx2: 1.0 / (grid.dx * grid.dx),
            inv_dz: 1.0 / grid.dz,
            inv_dz2: 1.0 / (grid.dz * grid.dz),
            dt2,
            inv_cell_area: 1.0 / (grid.dx * grid.dz),
            nt: cfg.nt,
        })
    }

    /// Interior `(ix, iz)` to padded `(izp, ixp)`.
    pub(crate) fn padded_pos(&self, pos: (usize, usize)) -> (usize, usize) {
        (pos.1 + self.pad, pos.0 + self.pad)
    }
}

/// Scratch arrays reused across steps of one shot.
pub(crate) struct Scratch {
    pub g: Array2<f64>,
    pub h: Array2<f64>,
    /// Combined spatial term S^n = Sx + Sz after a step.
    pub s: Array2<f64>,
}

impl Scratch {
    pub(crate) fn zeros(npz: usize, npx: usize) -> Self {
        Scratch {
            g: Array2::zeros((npz, npx)),
            h: Array2::zeros((npz, npx)),
            s: Array2::zeros((npz, npx)),
        }
    }
}

pub(crate) enum Axis {
    X,
    Z,
}

/// `mem <- b*mem + a*input` with axis-dependent per-cell coefficients.
pub(crate) fn memvar_update(
    mem: &mut Array2<f64>,
    input: &Array2<f64>,
    profile: &AxisProfile,
    axis: Axis,
) {
    let (nz, nx) = mem.dim();
    let mem = mem.as_slice_mut().expect("padded fields are contiguous");
    let input = input.as_slice().expect("padded fields are contiguous");
    match axis {
        Axis::X => {
            for iz in HALF_WIDTH..nz - HALF_WIDTH {
                let base = iz * nx;
                for ix in HALF_WIDTH..nx - HALF_WIDTH {
                    let i = base + ix;
                    mem[i] = profile.b[ix] * mem[i] + profile.a[ix] * input[i];
                }
            }
        }
        Axis::Z => {
            for iz in HALF_WIDTH..nz - HALF_WIDTH {
                let base = iz * nx;
                let (a, b) = (profile.a[iz], profile.b[iz]);
                for ix in HALF_WIDTH..nx - HALF_WIDTH {
                    let i = base + ix;
                    mem[i] = b * mem[i] + a * input[i];
                }
            }
        }
    }
}

/// One leapfrog step: fills `sc.s` with the combined spatial term of this
/// step, writes u^{n+1} into `st.u_next` (source injected), and checks
/// finiteness. The caller records traces and rotates.
pub(crate) fn advance(
    p: &Problem,
    st: &mut WavefieldState,
    sc: &mut Scratch,
    wn: f64,
    src_p: (usize, usize),
    n: usize,
) -> Result<()> {
    // x axis: S_x = (Dxx u + Dx psi_x) + xi_x with fresh memory variables.
    stencil::d1x(&mut sc.g, &st.u_curr, p.inv_dx);
    memvar_update(&mut st.psi_x, &sc.g, &p.px, Axis::X);
    stencil::d2x(&mut sc.h, &st.u_curr, p.inv_dx2);
    stencil::d1x(&mut sc.g, &st.psi_x, p.inv_dx);
    add_assign(&mut sc.h, &sc.g);
    memvar_update(&mut st.xi_x, &sc.h, &p.px, Axis::X);
    assign_sum(&mut sc.s, &sc.h, &st.xi_x);

    // z axis, accumulated into the same S.
    stencil::d1z(&mut sc.g, &st.u_curr, p.inv_dz);
    memvar_update(&mut st.psi_z, &sc.g, &p.pz, Axis::Z);
    stencil::d2z(&mut sc.h, &st.u_curr, p.inv_dz2);
    stencil::d1z(&mut sc.g, &st.psi_z, p.inv_dz);
    add_assign(&mut sc.h, &sc.g);
    memvar_update(&mut st.xi_z, &sc.h, &p.pz, Axis::Z);
    add_sum(&mut sc.s, &sc.h, &st.xi_z);

    // Leapfrog update restricted to the updatable region; ghost stays zero.
    {
        let (nz, nx) = (p.npz, p.npx);
        let u_next = st.u_next.as_slice_mut().expect("contiguous");
        let u_curr = st.u_curr.as_slice().expect("contiguous");
        let u_prev = st.u_prev.as_slice().expect("contiguous");
        let m2dt2 = p.m2dt2.as_slice().expect("contiguous");
        let s = sc.s.as_slice().expect("contiguous");
        let mut bad = false;
        for iz in HALF_WIDTH..nz - HALF_WIDTH {
            let base = iz * nx;
            for ix in HALF_WIDTH..nx - HALF_WIDTH {
                let i = base + ix;
                let v = 2.0 * u_curr[i] - u_prev[i] + m2dt2[i] * s[i];
                u_next[i] = v;
                bad |= !v.is_finite();
            }
        }
        if bad {
            return Err(SolverError::Divergence { step: n });
        }
    }
    st.u_next[src_p] += wn * p.m2dt2[src_p] * p.inv_cell_area;
    if !st.u_next[src_p].is_finite() {
        return Err(SolverError::Divergence { step: n });
    }
    Ok(())
}

fn add_assign(out: &mut Array2<f64>, rhs: &Array2<f64>) {
    let out = out.as_slice_mut().expect("contiguous");
    let rhs = rhs.as_slice().expect("contiguous");
    for i in 0..out.len() {
        out[i] += rhs[i];
    }
}

fn assign_sum(out: &mut Array2<f64>, a: &Array2<f64>, b: &Array2<f64>) {
    let out = out.as_slice_mut().expect("contiguous");
    let a = a.as_slice().expect("contiguous");
    let b = b.as_slice().expect("contiguous");
    for i in 0..out.len() {
        out[i] = a[i] + b[i];
    }
}

fn add_sum(out: &mut Array2<f64>, a: &Array2<f64>, b: &Array2<f64>) {
    let out = out.as_slice_mut().expect("contiguous");
    let a = a.as_slice().expect("contiguous");
    let b = b.as_slice().expect("contiguous");
    for i in 0..out.len() {
        out[i] += a[i] + b[i];
    }
}

/// Observers the gradient pass hooks into the forward loop.
pub(crate) trait Recorder {
    /// State as it stands before step `n` runs (u^{n-1}, u^n, memvars).
    fn before_step(&mut self, _n: usize, _state: &WavefieldState) {}
    /// Spatial term S^n after step `n` computed it.
    fn after_step(&mut self, _n: usize, _s: &Array2<f64>, _state: &WavefieldState) {}
}

pub(crate) struct NoRecord;
impl Recorder for NoRecord {}

/// Run one shot, returning traces shaped (n_receivers, nt). Traces sample
/// u^{n+1} at the receiver nodes, after source injection.
pub(crate) fn run_shot(
    p: &Problem,
    source: (usize, usize),
    receivers: &[(usize, usize)],
    wavelet: &[f64],
    recorder: &mut impl Recorder,
) -> Result<Array2<f64>> {
    let src_p = p.padded_pos(source);
    let recv_p: Vec<(usize, usize)> = receivers.iter().map(|&r| p.padded_pos(r)).collect();
    let mut st = WavefieldState::zeros(p.npz, p.npx);
    let mut sc = Scratch::zeros(p.npz, p.npx);
    let mut traces = Array2::zeros((receivers.len(), p.nt));
    for n in 0..p.nt {
        recorder.before_step(n, &st);
        advance(p, &mut st, &mut sc, wavelet[n], src_p, n)?;
        for (r, &pos) in recv_p.iter().enumerate() {
            traces[(r, n)] = st.u_next[pos];
        }
        recorder.after_step(n, &sc.s, &st);
        st.rotate();
    }
    Ok(traces)
}

pub(crate) fn check_acquisition(
    model: &VelocityModel,
    geom: &AcquisitionGeometry,
    wavelet: &RickerWavelet,
    cfg: &SolverConfig,
) -> Result<()> {
    let grid = model.grid();
    for &(ix, iz) in geom.sources.iter().chain(geom.receivers.iter()) {
        if !grid.contains(ix, iz) {
            return Err(SolverError::invalid(format!(
                "position (ix={ix}, iz={iz}) outside grid {}x{}",
                grid.nx, grid.nz
            )));
        }
    }
    if wavelet.dt != cfg.dt {
        return Err(SolverError::invalid(format!(
            "wavelet dt {} differs from solver dt {}",
            wavelet.dt, cfg.dt
        )));
    }
    if wavelet.samples.len() < cfg.nt {
        return Err(SolverError::invalid(format!(
            "wavelet has {} samples, need at least nt = {}",
            wavelet.samples.len(),
            cfg.nt
        )));
    }
    if wavelet.samples.iter().any(|w| !w.is_finite()) {
        return Err(SolverError::invalid("wavelet contains non-finite samples"));
    }
    Ok(())
}

/// Record every shot of the acquisition through the model.
pub fn simulate_shots(
    model: &VelocityModel,
    geom: &AcquisitionGeometry,
    wavelet: &RickerWavelet,
    cfg: &SolverConfig,
) -> Result<ShotGather> {
    check_acquisition(model, geom, wavelet, cfg)?;
    let problem = Problem::new(model, cfg)?;
    let per_shot = map_shots(geom.n_shots(), |s| {
        run_shot(&problem, geom.sources[s], &geom.receivers, &wavelet.samples, &mut NoRecord)
    })?;

    let mut data = Array3::zeros((geom.n_shots(), geom.n_receivers(), cfg.nt));
    for (s, traces) in per_shot.into_iter().enumerate() {
        data.index_axis_mut(ndarray::Axis(0), s).assign(&traces);
    }
    ShotGather::new(data, cfg.dt).map_err(|e| SolverError::invalid(e.to_string()))
}
