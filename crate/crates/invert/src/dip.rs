//! Network-reparameterized driver: the model is the network's decoding of a
//! fixed input (the starting model), and the network weights are the only
//! unknowns. Gradients chain the exact solver adjoint through the network.

use sfwi_core::VelocityModel;
use sfwi_net::{warm_dip_loss_and_grad, FlowModel, Normalization};
use sfwi_optim::{AdamW, AdamWConfig};
use sfwi_solver::model_gradient;

use crate::runner::{project_emitted, InversionProblem, InversionOutput, Run};
use crate::{InversionConfig, InvertError, Method, Result};

pub fn run_dip_fwi(cfg: &InversionConfig, prob: &InversionProblem) -> Result<InversionOutput> {
    cfg.validate()?;
    if cfg.method != Method::Dip {
        return Err(InvertError::invalid(format!(
            "configuration selects {:?}, driver runs Dip",
            cfg.method
        )));
    }
    let grid = *prob.model0.grid();
    let z = prob.model0.values();

    let norm = Normalization::from_reference(z)?;
    let flow = FlowModel::new(cfg.net.clone(), norm)?;
    let mut params = flow.init_params(cfg.seed);
    // One optimizer across warm start and inversion; its moments carry over.
    let mut opt = AdamW::new(AdamWConfig::new(cfg.lr_net)?, params.len());

    for _ in 0..cfg.warm_start_steps {
        let (_, grad) = warm_dip_loss_and_grad(&flow, &params, z, z)?;
        opt.step(&mut params, &grad, "net")?;
    }

    let mut run = Run::new(cfg, prob);
    for _ in 0..cfg.total_physics_steps {
        let step = run.next_step();
        let decoded = flow.reparam_model(&params, z).map_err(|e| InvertError::at_step(step, e))?;
        // The graph sees the raw decoding; bounds only shape what is emitted.
        let model = VelocityModel::new(grid, decoded)
            .map_err(|e| InvertError::at_step(step, e))?;
        let (misfit, g_model) =
            model_gradient(&model, prob.geom, prob.wavelet, prob.d_obs, prob.solver)
                .map_err(|e| InvertError::at_step(step, e))?;
        let (_, g_params) = flow
            .reparam_model_with_grad(&params, z, &g_model)
            .map_err(|e| InvertError::at_step(step, e))?;
        opt.step(&mut params, &g_params, "net").map_err(|e| InvertError::at_step(step, e))?;

        run.note(misfit, || {
            let decoded = flow.reparam_model(&params, z)?;
            project_emitted(cfg, grid, &decoded)
        })?;
    }

    let decoded = flow.reparam_model(&params, z)?;
    let final_model = project_emitted(cfg, grid, &decoded)?;
    Ok(run.finish(final_model, None))
}
