//! Pixel-space drivers: plain data-misfit descent and its TV-regularized
//! variant share one loop; the plain driver is the zero-weight case with
//! the penalty skipped entirely, so the two trajectories are bit-identical
//! when the weight is zero.

use sfwi_core::VelocityModel;
use sfwi_optim::{tv_value_and_grad, AdamW, AdamWConfig};
use sfwi_solver::model_gradient;

use crate::runner::{InversionProblem, InversionOutput, Run};
use crate::{InversionConfig, InvertError, Method, Result, TvWeight};

pub fn run_conventional_fwi(
    cfg: &InversionConfig,
    prob: &InversionProblem,
) -> Result<InversionOutput> {
    expect_method(cfg, Method::Fwi)?;
    let mut out = pixel_descent(cfg, prob, TvWeight::Fixed(0.0))?;
    out.resolved_lambda = None;
    Ok(out)
}

pub fn run_tv_fwi(cfg: &InversionConfig, prob: &InversionProblem) -> Result<InversionOutput> {
    expect_method(cfg, Method::FwiTv)?;
    pixel_descent(cfg, prob, cfg.lambda_tv)
}

fn expect_method(cfg: &InversionConfig, want: Method) -> Result<()> {
    cfg.validate()?;
    if cfg.method != want {
        return Err(InvertError::invalid(format!(
            "configuration selects {:?}, driver runs {want:?}",
            cfg.method
        )));
    }
    Ok(())
}

fn pixel_descent(
    cfg: &InversionConfig,
    prob: &InversionProblem,
    weight: TvWeight,
) -> Result<InversionOutput> {
    let grid = *prob.model0.grid();
    let mut values = prob.model0.values().clone();
    let n = values.len();
    let mut opt = AdamW::new(AdamWConfig::new(cfg.lr_model)?, n);
    let mut run = Run::new(cfg, prob);
    // Auto weights resolve against the first evaluation.
    let mut lambda: Option<f64> = match weight {
        TvWeight::Fixed(l) => Some(l),
        TvWeight::Auto { .. } => None,
    };

    for _ in 0..cfg.total_physics_steps {
        let step = run.next_step();
        let model = VelocityModel::new(grid, values.clone())?;
        let (misfit, mut grad) =
            model_gradient(&model, prob.geom, prob.wavelet, prob.d_obs, prob.solver)
                .map_err(|e| InvertError::at_step(step, e))?;

        let lam = match lambda {
            Some(l) => l,
            None => {
                let TvWeight::Auto { factor } = weight else { unreachable!() };
                let (tv0, _) = tv_value_and_grad(&model, cfg.tv_eps)?;
                let resolved = factor * misfit / tv0;
                if !resolved.is_finite() {
                    return Err(InvertError::Diverged {
                        step,
                        message: format!(
                            "auto TV weight {resolved} from misfit {misfit} and tv {tv0}"
                        ),
                    });
                }
                lambda = Some(resolved);
                resolved
            }
        };
        if lam != 0.0 {
            let (_, tv_grad) = tv_value_and_grad(&model, cfg.tv_eps)?;
            grad.scaled_add(lam, &tv_grad);
        }

        let gslice = grad.as_slice().expect("gradient is contiguous");
        let vslice = values.as_slice_mut().expect("model values are contiguous");
        opt.step(vslice, gslice, "model").map_err(|e| InvertError::at_step(step, e))?;
        cfg.bounds.project_slice(vslice);

        run.note(misfit, || Ok(VelocityModel::new(grid, values.clone())?))?;
    }

    // Projection runs inside the loop, so the final values are in bounds.
    let final_model = VelocityModel::new(grid, values)?;
    Ok(run.finish(final_model, lambda))
}
