use std::time::Instant;

use ndarray::Array2;
use sfwi_core::{AcquisitionGeometry, RickerWavelet, ShotGather, VelocityModel};
use sfwi_metrics::{effective_rank, rel_l2, ssim, SsimConfig};
use sfwi_solver::SolverConfig;

use crate::{ConvergenceRecord, InversionConfig, InvertError, RecordRow, Result};

/// Everything an inversion needs besides its own configuration. The truth
/// model is only used for reporting metrics, never by the drivers.
#[derive(Debug, Clone, Copy)]
pub struct InversionProblem<'a> {
    pub model0: &'a VelocityModel,
    pub geom: &'a AcquisitionGeometry,
    pub wavelet: &'a RickerWavelet,
    pub d_obs: &'a ShotGather,
    pub solver: &'a SolverConfig,
    pub truth: Option<&'a VelocityModel>,
}

#[derive(Debug)]
pub struct InversionOutput {
    pub final_model: VelocityModel,
    pub record: ConvergenceRecord,
    /// Bounds-projected models at the recorded steps, keyed by physics step.
    pub snapshots: Vec<(usize, VelocityModel)>,
    /// How many forward+adjoint evaluations the run actually spent.
    pub physics_evaluations: usize,
    /// The TV weight that was actually applied, when the method has one.
    pub resolved_lambda: Option<f64>,
}

/// Shared bookkeeping for all drivers: the evaluation counter, the wall
/// clock, and the recording cadence. Drivers call `note` once per physics
/// evaluation, passing a closure that produces the emitted model so the
/// (possibly costly) emission only happens on recorded steps.
pub(crate) struct Run<'a> {
    cfg: &'a InversionConfig,
    prob: &'a InversionProblem<'a>,
    started: Instant,
    evals: usize,
    record: ConvergenceRecord,
    snapshots: Vec<(usize, VelocityModel)>,
}

impl<'a> Run<'a> {
    pub(crate) fn new(cfg: &'a InversionConfig, prob: &'a InversionProblem<'a>) -> Self {
        Run {
            cfg,
            prob,
            started: Instant::now(),
            evals: 0,
            record: ConvergenceRecord::new(),
            snapshots: Vec::new(),
        }
    }

    /// The physics step that is about to run (1-based).
    pub(crate) fn next_step(&self) -> usize {
        self.evals + 1
    }

    pub(crate) fn note(
        &mut self,
        misfit: f64,
        emitted: impl FnOnce() -> Result<VelocityModel>,
    ) -> Result<()> {
        self.evals += 1;
        let step = self.evals;
        if !misfit.is_finite() {
            return Err(InvertError::Diverged {
                step,
                message: format!("data misfit became {misfit}"),
            });
        }
        let due = step == 1
            || step % self.cfg.record_every == 0
            || step == self.cfg.total_physics_steps;
        if !due {
            return Ok(());
        }
        let model = emitted().map_err(|e| InvertError::at_step(step, e))?;
        let (rel, structural) = match self.prob.truth {
            Some(truth) => (
                Some(rel_l2(model.values(), truth.values()).map_err(at(step))?),
                Some(ssim(model.values(), truth.values(), &SsimConfig::default())
                    .map_err(at(step))?),
            ),
            None => (None, None),
        };
        let rank = effective_rank(model.values(), None).map_err(at(step))?;
        self.record.push(RecordRow {
            physics_step: step,
            data_misfit: misfit,
            rel_l2: rel,
            ssim: structural,
            effective_rank: rank,
            wall_seconds: self.started.elapsed().as_secs_f64(),
        })?;
        self.snapshots.push((step, model));
        Ok(())
    }

    pub(crate) fn finish(
        self,
        final_model: VelocityModel,
        resolved_lambda: Option<f64>,
    ) -> InversionOutput {
        debug_assert_eq!(self.evals, self.cfg.total_physics_steps);
        InversionOutput {
            final_model,
            record: self.record,
            snapshots: self.snapshots,
            physics_evaluations: self.evals,
            resolved_lambda,
        }
    }
}

fn at<E: Into<InvertError>>(step: usize) -> impl Fn(E) -> InvertError {
    move |e| InvertError::at_step(step, e)
}

/// Clamp a raw field to the configured velocity box and wrap it as a model.
/// Used for everything the drivers emit; the differentiation graphs of the
/// network methods stay unconstrained.
pub(crate) fn project_emitted(
    cfg: &InversionConfig,
    grid: sfwi_core::Grid2D,
    values: &Array2<f64>,
) -> Result<VelocityModel> {
    let clamped = values.mapv(|v| cfg.bounds.clamp(v));
    Ok(VelocityModel::new(grid, clamped)?)
}
