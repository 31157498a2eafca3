//! Flow-guided driver. The run keeps a frozen starting model m0 and a
//! moving target estimate; each outer sweep interpolates between them at a
//! normalized time, proposes a target by applying the flow at that point,
//! and spends the inner budget fitting the flow so the proposal explains
//! the data. The target estimate is then re-applied and the sweep advances.

use ndarray::Array2;
use sfwi_core::VelocityModel;
use sfwi_net::{lerp_path, warm_sfm_loss_and_grad, FlowModel, Normalization};
use sfwi_optim::{AdamW, AdamWConfig};
use sfwi_solver::model_gradient;

use crate::runner::{project_emitted, InversionProblem, InversionOutput, Run};
use crate::{InversionConfig, InvertError, Method, Result};

/// The pair of fields the sweep moves between. The starting model never
/// changes; the target estimate is replaced once per outer step.
struct SweepState {
    m0: Array2<f64>,
    target: Array2<f64>,
}

impl SweepState {
    /// Interpolated model at normalized time t: a convex combination, so
    /// every cell lies between the corresponding cells of the endpoints.
    fn interpolate(&self, t: f64) -> Result<Array2<f64>> {
        Ok(lerp_path(&self.m0, &self.target, t)?)
    }
}

pub fn run_sfm_fwi(cfg: &InversionConfig, prob: &InversionProblem) -> Result<InversionOutput> {
    cfg.validate()?;
    if cfg.method != Method::Sfm {
        return Err(InvertError::invalid(format!(
            "configuration selects {:?}, driver runs Sfm",
            cfg.method
        )));
    }
    let sfm = cfg.sfm.expect("validated above");
    let grid = *prob.model0.grid();
    let m0 = prob.model0.values().clone();

    let norm = Normalization::from_reference(&m0)?;
    let flow = FlowModel::new(cfg.net.clone(), norm)?;
    let mut params = flow.init_params(cfg.seed);
    let mut opt = AdamW::new(AdamWConfig::new(cfg.lr_net)?, params.len());

    for _ in 0..cfg.warm_start_steps {
        let (_, g) = warm_sfm_loss_and_grad(&flow, &params, &m0)?;
        opt.step(&mut params, &g, "net")?;
    }

    let mut run = Run::new(cfg, prob);
    let mut state = SweepState { m0: m0.clone(), target: m0.clone() };
    let denom = (sfm.outer_steps - 1) as f64;

    for s in 0..sfm.outer_steps {
        let t = s as f64 / denom;
        let gain = 1.0 - t;
        let m_t = state.interpolate(t)?;

        if gain == 0.0 {
            // Closing sweep: the proposal is the interpolated model itself
            // and the flow cotangent is exactly zero, so weight updates
            // cannot change anything observable. The physics budget is
            // still spent measuring the final target.
            for _ in 0..sfm.inner_steps {
                let step = run.next_step();
                let model = VelocityModel::new(grid, m_t.clone())
                    .map_err(|e| InvertError::at_step(step, e))?;
                let (misfit, _) =
                    model_gradient(&model, prob.geom, prob.wavelet, prob.d_obs, prob.solver)
                        .map_err(|e| InvertError::at_step(step, e))?;
                run.note(misfit, || project_emitted(cfg, grid, &m_t))?;
            }
            state.target = m_t;
            continue;
        }

        let mut last_proposal = None;
        for _ in 0..sfm.inner_steps {
            let step = run.next_step();
            let v = flow
                .velocity(&params, &m_t, t)
                .map_err(|e| InvertError::at_step(step, e))?;
            let proposal = &m_t + &v.mapv(|x| gain * x);
            // The solver sees the raw proposal; bounds only apply to what
            // gets emitted.
            let model = VelocityModel::new(grid, proposal.clone())
                .map_err(|e| InvertError::at_step(step, e))?;
            let (misfit, g_model) =
                model_gradient(&model, prob.geom, prob.wavelet, prob.d_obs, prob.solver)
                    .map_err(|e| InvertError::at_step(step, e))?;

            let cot = g_model.mapv(|g| gain * g);
            let (_, g_params) = flow
                .velocity_with_grad(&params, &m_t, t, &cot)
                .map_err(|e| InvertError::at_step(step, e))?;
            opt.step(&mut params, &g_params, "net")
                .map_err(|e| InvertError::at_step(step, e))?;
            last_proposal = Some(proposal);

            run.note(misfit, || {
                let v = flow.velocity(&params, &m_t, t)?;
                let emitted = &m_t + &v.mapv(|x| gain * x);
                project_emitted(cfg, grid, &emitted)
            })?;
        }

        state.target = if cfg.reuse_last_proposal {
            last_proposal.expect("inner_steps >= 1")
        } else {
            // Fresh application of the flow with the weights as they stand
            // after the sweep's final update.
            let v = flow.velocity(&params, &m_t, t)?;
            &m_t + &v.mapv(|x| gain * x)
        };
    }

    let final_model = project_emitted(cfg, grid, &state.target)?;
    Ok(run.finish(final_model, None))
}

/// One row of an outer/inner split comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub outer_steps: usize,
    pub inner_steps: usize,
    pub rel_l2: Option<f64>,
    pub ssim: Option<f64>,
}

/// Runs the flow-guided driver once per (outer, inner) split, same seed and
/// data throughout. Every split must spend the same physics budget; the
/// offending pair is named otherwise.
pub fn ablation_grid(
    cfg: &InversionConfig,
    pairs: &[(usize, usize)],
    prob: &InversionProblem,
) -> Result<Vec<AblationRow>> {
    if pairs.is_empty() {
        return Err(InvertError::invalid("ablation needs at least one (outer, inner) pair"));
    }
    for &(outer, inner) in pairs {
        let split = crate::SfmConfig { outer_steps: outer, inner_steps: inner };
        split.validate(cfg.total_physics_steps).map_err(|e| {
            InvertError::invalid(format!("pair ({outer}, {inner}) rejected: {e}"))
        })?;
    }

    let mut rows = Vec::with_capacity(pairs.len());
    for &(outer, inner) in pairs {
        let mut run_cfg = cfg.clone();
        run_cfg.method = Method::Sfm;
        run_cfg.sfm = Some(crate::SfmConfig { outer_steps: outer, inner_steps: inner });
        let out = run_sfm_fwi(&run_cfg, prob)?;
        let (rel, structural) = match prob.truth {
            Some(truth) => {
                let rel = sfwi_metrics::rel_l2(out.final_model.values(), truth.values())?;
                let s = sfwi_metrics::ssim(
                    out.final_model.values(),
                    truth.values(),
                    &sfwi_metrics::SsimConfig::default(),
                )?;
                (Some(rel), Some(s))
            }
            None => (None, None),
        };
        rows.push(AblationRow { outer_steps: outer, inner_steps: inner, rel_l2: rel, ssim: structural });
    }
    Ok(rows)
}

/// CSV for the ablation table: `outer,inner,rel_l2,ssim`.
pub fn write_ablation_csv<W: std::io::Write>(
    rows: &[AblationRow],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "outer,inner,rel_l2,ssim")?;
    for row in rows {
        let rel = row.rel_l2.map(|v| v.to_string()).unwrap_or_default();
        let s = row.ssim.map(|v| v.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{}", row.outer_steps, row.inner_steps, rel, s)?;
    }
    Ok(())
}
