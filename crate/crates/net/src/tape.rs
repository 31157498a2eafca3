//! Reverse-mode differentiation over an explicit operation record. Each
//! forward call appends a node holding its inputs' ids and its value; the
//! backward pass walks the record once in reverse, accumulating cotangents,
//! and folds parameter cotangents into a flat gradient vector.

use crate::ops;
use crate::tensor::Tensor;
use crate::{NetError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug)]
enum Op {
    /// External constant input; receives no gradient of interest.
    Input,
    /// Slice of the flat parameter vector starting at `offset`.
    Param { offset: usize },
    Conv2d { x: NodeId, w: NodeId, b: NodeId, pad: usize },
    GroupNorm { x: NodeId, gamma: NodeId, beta: NodeId, groups: usize, means: Vec<f64>, inv_stds: Vec<f64> },
    Silu { x: NodeId },
    Linear { x: NodeId, w: NodeId, b: NodeId },
    Add { a: NodeId, b: NodeId },
    /// Broadcast a `[C]` vector across the spatial axes of a `[C, H, W]` map.
    AddChannel { x: NodeId, v: NodeId },
    Scale { x: NodeId, c: f64 },
    Upsample2 { x: NodeId },
    Downsample2 { x: NodeId },
    /// Concatenate along the channel axis.
    Concat { a: NodeId, b: NodeId },
    Pad2d { x: NodeId, pads: (usize, usize, usize, usize) },
    Crop2d { x: NodeId, corner: (usize, usize) },
}

struct Node {
    op: Op,
    value: Tensor,
}

/// One recorded forward pass over a fixed parameter vector.
pub struct Tape<'p> {
    params: &'p [f64],
    nodes: Vec<Node>,
}

impl<'p> Tape<'p> {
    pub fn new(params: &'p [f64]) -> Self {
        Tape { params, nodes: Vec::new() }
    }

    pub fn value(&self, id: NodeId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, op: Op, value: Tensor) -> NodeId {
        self.nodes.push(Node { op, value });
        NodeId(self.nodes.len() - 1)
    }

    pub fn input(&mut self, value: Tensor) -> NodeId {
        self.push(Op::Input, value)
    }

    pub fn param(&mut self, offset: usize, shape: &[usize]) -> Result<NodeId> {
        let n: usize = shape.iter().product();
        if offset + n > self.params.len() {
            return Err(NetError::invalid(format!(
                "parameter slice {}..{} exceeds vector of length {}",
                offset,
                offset + n,
                self.params.len()
            )));
        }
        let value = Tensor::new(shape.to_vec(), self.params[offset..offset + n].to_vec())?;
        Ok(self.push(Op::Param { offset }, value))
    }

    pub fn conv2d(&mut self, x: NodeId, w: NodeId, b: NodeId, pad: usize) -> Result<NodeId> {
        let dims = self.value(x).chw()?;
        let wshape = self.value(w).shape().to_vec();
        let [c_out, c_in, kh, kw] = wshape[..] else {
            return Err(NetError::invalid(format!("conv weight must be 4D, got {wshape:?}")));
        };
        if c_in != dims.0 || kh != kw {
            return Err(NetError::invalid(format!(
                "conv weight {wshape:?} incompatible with input channels {}",
                dims.0
            )));
        }
        let (y, odims) = ops::conv2d(
            self.value(x).data(),
            dims,
            self.value(w).data(),
            (c_out, kh),
            self.value(b).data(),
            pad,
        );
        let value = Tensor::new(vec![odims.0, odims.1, odims.2], y)?;
        Ok(self.push(Op::Conv2d { x, w, b, pad }, value))
    }

    pub fn group_norm(
        &mut self,
        x: NodeId,
        gamma: NodeId,
        beta: NodeId,
        groups: usize,
        eps: f64,
    ) -> Result<NodeId> {
        let dims = self.value(x).chw()?;
        if dims.0 % groups != 0 {
            return Err(NetError::architecture(format!(
                "{} channels not divisible by {} normalization groups",
                dims.0, groups
            )));
        }
        let (y, means, inv_stds) = ops::group_norm(
            self.value(x).data(),
            dims,
            self.value(gamma).data(),
            self.value(beta).data(),
            groups,
            eps,
        );
        let value = Tensor::new(self.value(x).shape().to_vec(), y)?;
        Ok(self.push(Op::GroupNorm { x, gamma, beta, groups, means, inv_stds }, value))
    }

    pub fn silu(&mut self, x: NodeId) -> NodeId {
        let y = ops::silu(self.value(x).data());
        let value = Tensor::new(self.value(x).shape().to_vec(), y).expect("same shape");
        self.push(Op::Silu { x }, value)
    }

    pub fn linear(&mut self, x: NodeId, w: NodeId, b: NodeId) -> Result<NodeId> {
        let d_in = self.value(x).numel();
        let wshape = self.value(w).shape().to_vec();
        let [d_out, d_in_w] = wshape[..] else {
            return Err(NetError::invalid(format!("linear weight must be 2D, got {wshape:?}")));
        };
        if d_in_w != d_in {
            return Err(NetError::invalid(format!(
                "linear weight {wshape:?} incompatible with input length {d_in}"
            )));
        }
        let y = ops::linear(self.value(x).data(), self.value(w).data(), self.value(b).data(), d_out);
        Ok(self.push(Op::Linear { x, w, b }, Tensor::new(vec![d_out], y)?))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(NetError::invalid(format!(
                "add shape mismatch: {:?} vs {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        let y: Vec<f64> =
            self.value(a).data().iter().zip(self.value(b).data()).map(|(p, q)| p + q).collect();
        let value = Tensor::new(self.value(a).shape().to_vec(), y)?;
        Ok(self.push(Op::Add { a, b }, value))
    }

    pub fn add_channel(&mut self, x: NodeId, v: NodeId) -> Result<NodeId> {
        let (c, h, w) = self.value(x).chw()?;
        if self.value(v).shape() != [c] {
            return Err(NetError::invalid(format!(
                "channel bias shape {:?} incompatible with {} channels",
                self.value(v).shape(),
                c
            )));
        }
        let mut y = self.value(x).data().to_vec();
        for ch in 0..c {
            let bias = self.value(v).data()[ch];
            for e in &mut y[ch * h * w..(ch + 1) * h * w] {
                *e += bias;
            }
        }
        let value = Tensor::new(vec![c, h, w], y)?;
        Ok(self.push(Op::AddChannel { x, v }, value))
    }

    pub fn scale(&mut self, x: NodeId, c: f64) -> NodeId {
        let y: Vec<f64> = self.value(x).data().iter().map(|v| v * c).collect();
        let value = Tensor::new(self.value(x).shape().to_vec(), y).expect("same shape");
        self.push(Op::Scale { x, c }, value)
    }

    pub fn upsample2(&mut self, x: NodeId) -> Result<NodeId> {
        let (c, h, w) = self.value(x).chw()?;
        let y = ops::upsample2(self.value(x).data(), (c, h, w));
        Ok(self.push(Op::Upsample2 { x }, Tensor::new(vec![c, 2 * h, 2 * w], y)?))
    }

    pub fn downsample2(&mut self, x: NodeId) -> Result<NodeId> {
        let (c, h, w) = self.value(x).chw()?;
        if h % 2 != 0 || w % 2 != 0 {
            return Err(NetError::architecture(format!(
                "downsampling needs even spatial dims, got {h}x{w}"
            )));
        }
        let y = ops::downsample2(self.value(x).data(), (c, h, w));
        Ok(self.push(Op::Downsample2 { x }, Tensor::new(vec![c, h / 2, w / 2], y)?))
    }

    pub fn concat(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (ca, ha, wa) = self.value(a).chw()?;
        let (cb, hb, wb) = self.value(b).chw()?;
        if (ha, wa) != (hb, wb) {
            return Err(NetError::invalid(format!(
                "concat spatial mismatch: {ha}x{wa} vs {hb}x{wb}"
            )));
        }
        let mut y = Vec::with_capacity((ca + cb) * ha * wa);
        y.extend_from_slice(self.value(a).data());
        y.extend_from_slice(self.value(b).data());
        Ok(self.push(Op::Concat { a, b }, Tensor::new(vec![ca + cb, ha, wa], y)?))
    }

    pub fn pad2d(&mut self, x: NodeId, pads: (usize, usize, usize, usize)) -> Result<NodeId> {
        let (c, h, w) = self.value(x).chw()?;
        let y = ops::pad2d(self.value(x).data(), (c, h, w), pads);
        let value = Tensor::new(vec![c, h + pads.0 + pads.1, w + pads.2 + pads.3], y)?;
        Ok(self.push(Op::Pad2d { x, pads }, value))
    }

    pub fn crop2d(
        &mut self,
        x: NodeId,
        corner: (usize, usize),
        size: (usize, usize),
    ) -> Result<NodeId> {
        let (c, h, w) = self.value(x).chw()?;
        if corner.0 + size.0 > h || corner.1 + size.1 > w {
            return Err(NetError::invalid(format!(
                "crop window {corner:?}+{size:?} exceeds {h}x{w}"
            )));
        }
        let y = ops::crop2d(self.value(x).data(), (c, h, w), corner, size);
        Ok(self.push(Op::Crop2d { x, corner }, Tensor::new(vec![c, size.0, size.1], y)?))
    }

    /// Reverse sweep from `output` seeded with `cotangent`. Returns the flat
    /// parameter gradient (length `n_params`) and the cotangent of `wrt`
    /// when requested.
    pub fn backward(
        &self,
        output: NodeId,
        cotangent: &Tensor,
        n_params: usize,
        wrt: Option<NodeId>,
    ) -> Result<(Vec<f64>, Option<Tensor>)> {
        if self.nodes.is_empty() {
            return Err(NetError::State("backward without a recorded forward".into()));
        }
        if cotangent.shape() != self.value(output).shape() {
            return Err(NetError::invalid(format!(
                "cotangent shape {:?} does not match output shape {:?}",
                cotangent.shape(),
                self.value(output).shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[output.0] = Some(cotangent.clone());
        let mut param_grad = vec![0.0; n_params];

        for i in (0..self.nodes.len()).rev() {
            let Some(gy) = grads[i].take() else { continue };
            // Re-seed downstream contribution for the `wrt` probe before the
            // node is consumed.
            if wrt == Some(NodeId(i)) {
                let slot = &mut grads[i];
                *slot = Some(gy.clone());
            }
            match &self.nodes[i].op {
                Op::Input => {}
                Op::Param { offset } => {
                    for (j, g) in gy.data().iter().enumerate() {
                        param_grad[offset + j] += g;
                    }
                }
                Op::Conv2d { x, w, b, pad } => {
                    let dims = self.value(*x).chw()?;
                    let wshape = self.value(*w).shape();
                    let (c_out, k) = (wshape[0], wshape[2]);
                    let mut gx = self.grad_slot(&mut grads, *x);
                    let mut gw = Tensor::zeros(self.value(*w).shape().to_vec());
                    let mut gb = Tensor::zeros(self.value(*b).shape().to_vec());
                    ops::conv2d_backward(
                        self.value(*x).data(),
                        dims,
                        self.value(*w).data(),
                        (c_out, k),
                        *pad,
                        gy.data(),
                        gx.data_mut(),
                        gw.data_mut(),
                        gb.data_mut(),
                    );
                    grads[x.0] = Some(gx);
                    self.accumulate(&mut grads, *w, gw);
                    self.accumulate(&mut grads, *b, gb);
                }
                Op::GroupNorm { x, gamma, beta, groups, means, inv_stds } => {
                    let dims = self.value(*x).chw()?;
                    let mut gx = self.grad_slot(&mut grads, *x);
                    let mut gg = Tensor::zeros(self.value(*gamma).shape().to_vec());
                    let mut gb = Tensor::zeros(self.value(*beta).shape().to_vec());
                    ops::group_norm_backward(
                        self.value(*x).data(),
                        dims,
                        self.value(*gamma).data(),
                        *groups,
                        means,
                        inv_stds,
                        gy.data(),
                        gx.data_mut(),
                        gg.data_mut(),
                        gb.data_mut(),
                    );
                    grads[x.0] = Some(gx);
                    self.accumulate(&mut grads, *gamma, gg);
                    self.accumulate(&mut grads, *beta, gb);
                }
                Op::Silu { x } => {
                    let mut gx = self.grad_slot(&mut grads, *x);
                    ops::silu_backward(self.value(*x).data(), gy.data(), gx.data_mut());
                    grads[x.0] = Some(gx);
                }
                Op::Linear { x, w, b } => {
                    let d_out = self.value(*w).shape()[0];
                    let mut gx = self.grad_slot(&mut grads, *x);
                    let mut gw = Tensor::zeros(self.value(*w).shape().to_vec());
                    let mut gb = Tensor::zeros(self.value(*b).shape().to_vec());
                    ops::linear_backward(
                        self.value(*x).data(),
                        self.value(*w).data(),
                        d_out,
                        gy.data(),
                        gx.data_mut(),
                        gw.data_mut(),
                        gb.data_mut(),
                    );
                    grads[x.0] = Some(gx);
                    self.accumulate(&mut grads, *w, gw);
                    self.accumulate(&mut grads, *b, gb);
                }
                Op::Add { a, b } => {
                    self.accumulate(&mut grads, *a, gy.clone());
                    self.accumulate(&mut grads, *b, gy);
                }
                Op::AddChannel { x, v } => {
                    let (c, h, w) = self.value(*x).chw()?;
                    let mut gv = Tensor::zeros(vec![c]);
                    for ch in 0..c {
                        gv.data_mut()[ch] = gy.data()[ch * h * w..(ch + 1) * h * w].iter().sum();
                    }
                    self.accumulate(&mut grads, *x, gy);
                    self.accumulate(&mut grads, *v, gv);
                }
                Op::Scale { x, c } => {
                    let gx_new: Vec<f64> = gy.data().iter().map(|g| g * c).collect();
                    let t = Tensor::new(gy.shape().to_vec(), gx_new)?;
                    self.accumulate(&mut grads, *x, t);
                }
                Op::Upsample2 { x } => {
                    let dims = self.value(*x).chw()?;
                    let mut gx = self.grad_slot(&mut grads, *x);
                    ops::upsample2_backward(gy.data(), dims, gx.data_mut());
                    grads[x.0] = Some(gx);
                }
                Op::Downsample2 { x } => {
                    let dims = self.value(*x).chw()?;
                    let mut gx = self.grad_slot(&mut grads, *x);
                    ops::downsample2_backward(gy.data(), dims, gx.data_mut());
                    grads[x.0] = Some(gx);
                }
                Op::Concat { a, b } => {
                    let (ca, h, w) = self.value(*a).chw()?;
                    let (cb, _, _) = self.value(*b).chw()?;
                    let ga = Tensor::new(vec![ca, h, w], gy.data()[..ca * h * w].to_vec())?;
                    let gb = Tensor::new(vec![cb, h, w], gy.data()[ca * h * w..].to_vec())?;
                    self.accumulate(&mut grads, *a, ga);
                    self.accumulate(&mut grads, *b, gb);
                }
                Op::Pad2d { x, pads } => {
                    let dims = self.value(*x).chw()?;
                    let mut gx = self.grad_slot(&mut grads, *x);
                    ops::pad2d_backward(gy.data(), dims, *pads, gx.data_mut());
                    grads[x.0] = Some(gx);
                }
                Op::Crop2d { x, corner } => {
                    let dims = self.value(*x).chw()?;
                    let size = {
                        let s = self.nodes[i].value.shape();
                        (s[1], s[2])
                    };
                    let mut gx = self.grad_slot(&mut grads, *x);
                    ops::crop2d_backward(gy.data(), dims, *corner, size, gx.data_mut());
                    grads[x.0] = Some(gx);
                }
            }
        }

        let wrt_grad = match wrt {
            Some(id) => {
                Some(grads[id.0].take().unwrap_or_else(|| Tensor::zeros(self.value(id).shape().to_vec())))
            }
            None => None,
        };
        Ok((param_grad, wrt_grad))
    }

    /// Existing cotangent of `id`, or zeros of its shape. Takes the slot so
    /// the kernel can accumulate in place.
    fn grad_slot(&self, grads: &mut [Option<Tensor>], id: NodeId) -> Tensor {
        grads[id.0].take().unwrap_or_else(|| Tensor::zeros(self.value(id).shape().to_vec()))
    }

    fn accumulate(&self, grads: &mut [Option<Tensor>], id: NodeId, add: Tensor) {
        match &mut grads[id.0] {
            Some(g) => {
                for (gi, ai) in g.data_mut().iter_mut().zip(add.data()) {
                    *gi += ai;
                }
            }
            slot @ None => *slot = Some(add),
        }
    }
}
