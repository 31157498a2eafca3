//! Finite-difference validation of every tape primitive, a tiny two-layer
//! convolutional network checked parameter by parameter, and a sampled
//! check over the full network. Losses are cotangent-weighted sums so a
//! single backward pass yields every derivative at once.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sfwi_net::{FlowModel, FlowNet, NetConfig, NodeId, Normalization, Tape, Tensor, GROUP_NORM_EPS};

const REL_TOL: f64 = 1e-4;

fn fill(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn central_diff(loss: &dyn Fn(&[f64]) -> f64, at: &[f64], i: usize) -> f64 {
    let h = 1e-4 * at[i].abs().max(1.0);
    let mut p = at.to_vec();
    p[i] = at[i] + h;
    let up = loss(&p);
    p[i] = at[i] - h;
    let down = loss(&p);
    (up - down) / (2.0 * h)
}

fn assert_close(analytic: f64, numeric: f64, what: &str) {
    let denom = analytic.abs().max(numeric.abs()).max(1e-6);
    let rel = (analytic - numeric).abs() / denom;
    assert!(
        rel < REL_TOL,
        "{what}: analytic {analytic:.10e} vs numeric {numeric:.10e} (rel {rel:.3e})"
    );
}

/// Checks a scalar function of a flat vector against its claimed gradient,
/// at every index.
fn check_all(loss: &dyn Fn(&[f64]) -> f64, at: &[f64], grad: &[f64], what: &str) {
    assert_eq!(grad.len(), at.len(), "{what}: gradient length");
    for i in 0..at.len() {
        let fd = central_diff(loss, at, i);
        assert_close(grad[i], fd, &format!("{what}[{i}]"));
    }
}

/// Builds the loss `sum(cot * f(params))` where `f` assembles a tape graph
/// from the flat parameter vector, and returns (loss, param_grad).
fn tape_loss(
    build: &dyn Fn(&mut Tape) -> NodeId,
    params: &[f64],
    cot: &[f64],
) -> (f64, Vec<f64>) {
    let mut tape = Tape::new(params);
    let out = build(&mut tape);
    let y = tape.value(out);
    assert_eq!(y.numel(), cot.len(), "cotangent size");
    let loss = y.data().iter().zip(cot).map(|(a, b)| a * b).sum();
    let cot_t = Tensor::new(y.shape().to_vec(), cot.to_vec()).unwrap();
    let (pgrad, _) = tape.backward(out, &cot_t, params.len(), None).unwrap();
    (loss, pgrad)
}

fn check_primitive(build: &dyn Fn(&mut Tape) -> NodeId, n_params: usize, seed: u64, what: &str) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = fill(&mut rng, n_params);
    let out_numel = {
        let mut tape = Tape::new(&params);
        let out = build(&mut tape);
        tape.value(out).numel()
    };
    let cot = fill(&mut rng, out_numel);
    let (_, grad) = tape_loss(build, &params, &cot);
    let loss = |p: &[f64]| tape_loss(build, p, &cot).0;
    check_all(&loss, &params, &grad, what);
}

#[test]
fn conv_3x3_gradients() {
    // x [2,5,4] as a parameter block, then w [3,2,3,3] and b [3].
    let build = |tape: &mut Tape| -> NodeId {
        let x = tape.param(0, &[2, 5, 4]).unwrap();
        let w = tape.param(40, &[3, 2, 3, 3]).unwrap();
        let b = tape.param(94, &[3]).unwrap();
        tape.conv2d(x, w, b, 1).unwrap()
    };
    check_primitive(&build, 97, 11, "conv 3x3 pad 1");
}

#[test]
fn conv_1x1_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let x = tape.param(0, &[3, 4, 4]).unwrap();
        let w = tape.param(48, &[2, 3, 1, 1]).unwrap();
        let b = tape.param(54, &[2]).unwrap();
        tape.conv2d(x, w, b, 0).unwrap()
    };
    check_primitive(&build, 56, 12, "conv 1x1 pad 0");
}

#[test]
fn group_norm_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let x = tape.param(0, &[4, 3, 3]).unwrap();
        let gamma = tape.param(36, &[4]).unwrap();
        let beta = tape.param(40, &[4]).unwrap();
        tape.group_norm(x, gamma, beta, 2, GROUP_NORM_EPS).unwrap()
    };
    check_primitive(&build, 44, 13, "group norm, 2 groups");
}

#[test]
fn group_norm_per_channel_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let x = tape.param(0, &[3, 2, 4]).unwrap();
        let gamma = tape.param(24, &[3]).unwrap();
        let beta = tape.param(27, &[3]).unwrap();
        tape.group_norm(x, gamma, beta, 3, GROUP_NORM_EPS).unwrap()
    };
    check_primitive(&build, 30, 14, "group norm, one group per channel");
}

#[test]
fn silu_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let x = tape.param(0, &[2, 3, 3]).unwrap();
        tape.silu(x)
    };
    check_primitive(&build, 18, 15, "silu");
}

#[test]
fn linear_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let x = tape.param(0, &[6]).unwrap();
        let w = tape.param(6, &[4, 6]).unwrap();
        let b = tape.param(30, &[4]).unwrap();
        tape.linear(x, w, b).unwrap()
    };
    check_primitive(&build, 34, 16, "linear");
}

#[test]
fn add_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let a = tape.param(0, &[2, 2, 3]).unwrap();
        let b = tape.param(12, &[2, 2, 3]).unwrap();
        tape.add(a, b).unwrap()
    };
    check_primitive(&build, 24, 17, "elementwise add");
}

#[test]
fn add_channel_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let x = tape.param(0, &[3, 2, 2]).unwrap();
        let v = tape.param(12, &[3]).unwrap();
        tape.add_channel(x, v).unwrap()
    };
    check_primitive(&build, 15, 18, "per-channel add");
}

#[test]
fn scale_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let x = tape.param(0, &[2, 2, 2]).unwrap();
        tape.scale(x, 1.75)
    };
    check_primitive(&build, 8, 19, "scalar scale");
}

#[test]
fn upsample_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let x = tape.param(0, &[2, 3, 3]).unwrap();
        tape.upsample2(x).unwrap()
    };
    check_primitive(&build, 18, 20, "nearest upsample");
}

#[test]
fn downsample_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let x = tape.param(0, &[2, 4, 4]).unwrap();
        tape.downsample2(x).unwrap()
    };
    check_primitive(&build, 32, 21, "mean downsample");
}

#[test]
fn concat_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let a = tape.param(0, &[2, 3, 3]).unwrap();
        let b = tape.param(18, &[3, 3, 3]).unwrap();
        tape.concat(a, b).unwrap()
    };
    check_primitive(&build, 45, 22, "channel concat");
}

#[test]
fn pad_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let x = tape.param(0, &[2, 3, 3]).unwrap();
        tape.pad2d(x, (1, 2, 0, 1)).unwrap()
    };
    check_primitive(&build, 18, 23, "zero pad");
}

#[test]
fn crop_gradients() {
    let build = |tape: &mut Tape| -> NodeId {
        let x = tape.param(0, &[2, 5, 5]).unwrap();
        tape.crop2d(x, (1, 0), (3, 4)).unwrap()
    };
    check_primitive(&build, 50, 24, "crop");
}

#[test]
fn input_cotangent_matches_finite_differences() {
    // Same conv scenario, but differentiating with respect to the input
    // tensor through the `wrt` probe instead of a parameter block.
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let params = fill(&mut rng, 57);
    let x0 = fill(&mut rng, 40);
    let cot = fill(&mut rng, 60);

    let run = |xdata: &[f64]| -> (f64, Vec<f64>) {
        let mut tape = Tape::new(&params);
        let x = tape.input(Tensor::new(vec![2, 5, 4], xdata.to_vec()).unwrap());
        let w = tape.param(0, &[3, 2, 3, 3]).unwrap();
        let b = tape.param(54, &[3]).unwrap();
        let out = tape.conv2d(x, w, b, 1).unwrap();
        let loss = tape.value(out).data().iter().zip(&cot).map(|(a, b)| a * b).sum();
        let cot_t = Tensor::new(vec![3, 5, 4], cot.clone()).unwrap();
        let (_, xgrad) = tape.backward(out, &cot_t, params.len(), Some(x)).unwrap();
        (loss, xgrad.unwrap().into_data())
    };

    let (_, xgrad) = run(&x0);
    let loss = |xd: &[f64]| run(xd).0;
    check_all(&loss, &x0, &xgrad, "conv input cotangent");
}

#[test]
fn two_layer_conv_net_every_parameter() {
    // conv 1->8 (3x3), silu, conv 8->1 (3x3): all 153 parameters checked.
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let params = fill(&mut rng, 153);
    let input = fill(&mut rng, 16);
    let cot = fill(&mut rng, 16);

    let build = move |tape: &mut Tape| -> NodeId {
        let x = tape.input(Tensor::new(vec![1, 4, 4], input.clone()).unwrap());
        let w1 = tape.param(0, &[8, 1, 3, 3]).unwrap();
        let b1 = tape.param(72, &[8]).unwrap();
        let h = tape.conv2d(x, w1, b1, 1).unwrap();
        let h = tape.silu(h);
        let w2 = tape.param(80, &[1, 8, 3, 3]).unwrap();
        let b2 = tape.param(152, &[1]).unwrap();
        tape.conv2d(h, w2, b2, 1).unwrap()
    };

    let (_, grad) = tape_loss(&build, &params, &cot);
    let loss = |p: &[f64]| tape_loss(&build, p, &cot).0;
    check_all(&loss, &params, &grad, "two-layer conv net");
}

#[test]
fn full_network_sampled_parameters() {
    // Two resolution levels, 8 base channels, random (not structured) weights
    // so no gradient path is dead. Two entries per layout block are probed.
    let cfg = NetConfig {
        base_channels: 8,
        channel_mults: vec![1, 2],
        blocks_per_level: 1,
        groups: 4,
        time_multiplier: 1000.0,
    };
    let net = FlowNet::new(cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let params: Vec<f64> = (0..net.n_params()).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let input = fill(&mut rng, 64);
    let cot_data = fill(&mut rng, 64);
    let t = 0.375;

    let cot = Tensor::new(vec![1, 8, 8], cot_data.clone()).unwrap();
    let x = Tensor::new(vec![1, 8, 8], input.clone()).unwrap();
    let (_, grad) = net.evaluate_with_grad(&params, x, t, &cot).unwrap();

    let loss = |p: &[f64]| -> f64 {
        let x = Tensor::new(vec![1, 8, 8], input.clone()).unwrap();
        let y = net.evaluate(p, x, t).unwrap();
        y.data().iter().zip(&cot_data).map(|(a, b)| a * b).sum()
    };

    let mut checked = 0;
    for entry in net.layout() {
        let first = entry.offset;
        let probe = entry.offset + rng.gen_range(0..entry.len());
        for &i in &[first, probe] {
            let fd = central_diff(&loss, &params, i);
            assert_close(grad[i], fd, &format!("{}[{}]", entry.name, i - entry.offset));
            checked += 1;
        }
    }
    assert!(checked >= 2 * net.layout().len());
}

#[test]
fn flow_wrapper_chains_the_decode_scale() {
    // The physical-units wrapper multiplies raw outputs by the normalization
    // scale; its parameter gradient must carry that factor.
    let cfg = NetConfig {
        base_channels: 8,
        channel_mults: vec![1, 2],
        blocks_per_level: 1,
        groups: 4,
        time_multiplier: 1000.0,
    };
    let flow = FlowModel::new(cfg, Normalization { mean: 2500.0, scale: 400.0 }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let params: Vec<f64> = (0..flow.n_params()).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let m = Array2::from_shape_fn((8, 8), |_| rng.gen_range(2000.0..3000.0));
    let cot = Array2::from_shape_fn((8, 8), |_| rng.gen_range(-1.0..1.0));
    let t = 0.25;

    let (_, grad) = flow.velocity_with_grad(&params, &m, t, &cot).unwrap();
    let loss = |p: &[f64]| -> f64 {
        let v = flow.velocity(p, &m, t).unwrap();
        v.iter().zip(cot.iter()).map(|(a, b)| a * b).sum()
    };

    for i in [0usize, 37, flow.n_params() / 2, flow.n_params() - 1] {
        let fd = central_diff(&loss, &params, i);
        assert_close(grad[i], fd, &format!("flow wrapper param {i}"));
    }
}
