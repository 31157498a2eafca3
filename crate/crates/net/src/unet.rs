//! Time-conditioned U-Net over single-channel fields, with all parameters
//! held in one flat vector described by a layout table.
//!
//! Fixed composition, recorded once here: residual blocks run
//! norm -> SiLU -> conv, the time feature is projected per block and added
//! after the first conv, and the final projection is zero-initialized so a
//! freshly built network is the zero map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embed::time_embed;
use crate::tape::{NodeId, Tape};
use crate::tensor::Tensor;
use crate::{NetError, Result};

pub const GROUP_NORM_EPS: f64 = 1e-5;

/// Architecture descriptor. Parameter shapes are a pure function of this.
#[derive(Debug, Clone, PartialEq)]
pub struct NetConfig {
    /// Channels at the finest level; also the sinusoid embedding width.
    pub base_channels: usize,
    /// Per-level multipliers, finest first. The level count is the length.
    pub channel_mults: Vec<usize>,
    /// Residual blocks per level in the encoder and decoder.
    pub blocks_per_level: usize,
    /// Group count of every normalization layer.
    pub groups: usize,
    /// Phase scale applied to t inside the sinusoidal embedding.
    pub time_multiplier: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            base_channels: 16,
            channel_mults: vec![1, 2, 2],
            blocks_per_level: 2,
            groups: 8,
            time_multiplier: 1000.0,
        }
    }
}

impl NetConfig {
    pub fn levels(&self) -> usize {
        self.channel_mults.len()
    }

    /// Spatial downsampling factor between input and the coarsest level.
    pub fn spatial_divisor(&self) -> usize {
        1 << (self.levels() - 1)
    }

    fn channels(&self, level: usize) -> usize {
        self.base_channels * self.channel_mults[level]
    }

    /// Time feature width after the two-layer MLP.
    fn time_features(&self) -> usize {
        4 * self.base_channels
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_channels == 0 || self.channel_mults.is_empty() || self.blocks_per_level == 0 {
            return Err(NetError::architecture(
                "base_channels, channel_mults and blocks_per_level must be nonzero",
            ));
        }
        if self.base_channels % 2 != 0 {
            return Err(NetError::architecture(format!(
                "base_channels must be even for the sinusoidal embedding, got {}",
                self.base_channels
            )));
        }
        if self.groups == 0 {
            return Err(NetError::architecture("groups must be at least 1"));
        }
        for (l, _) in self.channel_mults.iter().enumerate() {
            if self.channels(l) % self.groups != 0 {
                return Err(NetError::architecture(format!(
                    "level {l} has {} channels, not divisible by {} groups",
                    self.channels(l),
                    self.groups
                )));
            }
        }
        if !(self.time_multiplier.is_finite() && self.time_multiplier > 0.0) {
            return Err(NetError::architecture(format!(
                "time_multiplier must be positive and finite, got {}",
                self.time_multiplier
            )));
        }
        Ok(())
    }
}

/// One named parameter block in the flat vector.
#[derive(Debug, Clone)]
pub struct LayoutEntry {
    pub name: String,
    pub offset: usize,
    pub shape: Vec<usize>,
}

impl LayoutEntry {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy)]
struct ParamRef(usize);

#[derive(Debug)]
struct ConvSpec {
    w: ParamRef,
    b: ParamRef,
    k: usize,
}

#[derive(Debug)]
struct NormSpec {
    gamma: ParamRef,
    beta: ParamRef,
}

#[derive(Debug)]
struct LinearSpec {
    w: ParamRef,
    b: ParamRef,
}

#[derive(Debug)]
struct ResBlockSpec {
    norm1: NormSpec,
    conv1: ConvSpec,
    time_proj: LinearSpec,
    norm2: NormSpec,
    conv2: ConvSpec,
    /// 1x1 projection of the block input when channel counts differ.
    skip: Option<ConvSpec>,
}

/// Flat-parameter U-Net: the layout table and the module tree are built
/// once from the config; forward passes follow the same tree.
#[derive(Debug)]
pub struct FlowNet {
    cfg: NetConfig,
    layout: Vec<LayoutEntry>,
    n_params: usize,
    stem: ConvSpec,
    time_mlp1: LinearSpec,
    time_mlp2: LinearSpec,
    enc: Vec<Vec<ResBlockSpec>>,
    mid: Vec<ResBlockSpec>,
    dec: Vec<Vec<ResBlockSpec>>,
    out_norm: NormSpec,
    out_conv: ConvSpec,
}

struct LayoutBuilder {
    entries: Vec<LayoutEntry>,
    cursor: usize,
}

impl LayoutBuilder {
    fn push(&mut self, name: String, shape: Vec<usize>) -> ParamRef {
        let len: usize = shape.iter().product();
        self.entries.push(LayoutEntry { name, offset: self.cursor, shape });
        self.cursor += len;
        ParamRef(self.entries.len() - 1)
    }

    fn conv(&mut self, name: &str, c_in: usize, c_out: usize, k: usize) -> ConvSpec {
        ConvSpec {
            w: self.push(format!("{name}.w"), vec![c_out, c_in, k, k]),
            b: self.push(format!("{name}.b"), vec![c_out]),
            k,
        }
    }

    fn norm(&mut self, name: &str, c: usize) -> NormSpec {
        NormSpec {
            gamma: self.push(format!("{name}.scale"), vec![c]),
            beta: self.push(format!("{name}.shift"), vec![c]),
        }
    }

    fn linear(&mut self, name: &str, d_in: usize, d_out: usize) -> LinearSpec {
        LinearSpec {
            w: self.push(format!("{name}.w"), vec![d_out, d_in]),
            b: self.push(format!("{name}.b"), vec![d_out]),
        }
    }

    fn res_block(&mut self, name: &str, c_in: usize, c_out: usize, t_dim: usize) -> ResBlockSpec {
        ResBlockSpec {
            norm1: self.norm(&format!("{name}.norm1"), c_in),
            conv1: self.conv(&format!("{name}.conv1"), c_in, c_out, 3),
            time_proj: self.linear(&format!("{name}.time"), t_dim, c_out),
            norm2: self.norm(&format!("{name}.norm2"), c_out),
            conv2: self.conv(&format!("{name}.conv2"), c_out, c_out, 3),
            skip: (c_in != c_out).then(|| self.conv(&format!("{name}.skip"), c_in, c_out, 1)),
        }
    }
}

impl FlowNet {
    pub fn new(cfg: NetConfig) -> Result<Self> {
        cfg.validate()?;
        let mut b = LayoutBuilder { entries: Vec::new(), cursor: 0 };
        let levels = cfg.levels();
        let t_dim = cfg.time_features();

        let stem = b.conv("stem", 1, cfg.channels(0), 3);
        let time_mlp1 = b.linear("time_mlp1", cfg.base_channels, t_dim);
        let time_mlp2 = b.linear("time_mlp2", t_dim, t_dim);

        let mut enc = Vec::with_capacity(levels);
        let mut c_cur = cfg.channels(0);
        for l in 0..levels {
            let c_l = cfg.channels(l);
            let mut blocks = Vec::with_capacity(cfg.blocks_per_level);
            for k in 0..cfg.blocks_per_level {
                blocks.push(b.res_block(&format!("enc{l}.block{k}"), c_cur, c_l, t_dim));
                c_cur = c_l;
            }
            enc.push(blocks);
        }

        let c_bot = cfg.channels(levels - 1);
        let mid = vec![
            b.res_block("mid.block0", c_bot, c_bot, t_dim),
            b.res_block("mid.block1", c_bot, c_bot, t_dim),
        ];

        let mut dec = Vec::with_capacity(levels);
        let mut c_below = c_bot;
        for l in (0..levels).rev() {
            let c_l = cfg.channels(l);
            let mut blocks = Vec::with_capacity(cfg.blocks_per_level);
            let mut c_in = c_below + c_l; // upsampled features plus the skip
            for k in 0..cfg.blocks_per_level {
                blocks.push(b.res_block(&format!("dec{l}.block{k}"), c_in, c_l, t_dim));
                c_in = c_l;
            }
            dec.push(blocks);
            c_below = c_l;
        }
        dec.reverse(); // index by level, finest first, like enc

        let out_norm = b.norm("out.norm", cfg.channels(0));
        let out_conv = b.conv("out.conv", cfg.channels(0), 1, 3);

        let n_params = b.cursor;
        Ok(FlowNet {
            cfg,
            layout: b.entries,
            n_params,
            stem,
            time_mlp1,
            time_mlp2,
            enc,
            mid,
            dec,
            out_norm,
            out_conv,
        })
    }

    pub fn config(&self) -> &NetConfig {
        &self.cfg
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn layout(&self) -> &[LayoutEntry] {
        &self.layout
    }

    fn entry(&self, r: ParamRef) -> &LayoutEntry {
        &self.layout[r.0]
    }

    /// Fan-in-scaled uniform weights, zero biases, unit norm scales, and a
    /// zero final projection, drawn in layout order from one seeded stream.
    pub fn init_params(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; self.n_params];
        let final_conv_w = self.entry(self.out_conv.w).offset;
        let final_conv_b = self.entry(self.out_conv.b).offset;
        for e in &self.layout {
            let slot = &mut params[e.offset..e.offset + e.len()];
            let is_final = e.offset == final_conv_w || e.offset == final_conv_b;
            match e.shape.len() {
                // Norm scale/shift or a bias: read the name's suffix.
                1 if e.name.ends_with(".scale") => slot.fill(1.0),
                1 => slot.fill(0.0),
                _ if is_final => slot.fill(0.0),
                _ => {
                    // fan-in = product of all dims except the first
                    let fan_in: usize = e.shape[1..].iter().product();
                    let bound = 1.0 / (fan_in as f64).sqrt();
                    for v in slot {
                        *v = rng.gen_range(-bound..bound);
                    }
                }
            }
        }
        params
    }

    // Padding k/2 keeps the spatial size for every odd kernel used here.
    fn conv<'a>(&self, tape: &mut Tape<'a>, spec: &ConvSpec, x: NodeId) -> Result<NodeId> {
        let w = tape.param(self.entry(spec.w).offset, &self.entry(spec.w).shape)?;
        let b = tape.param(self.entry(spec.b).offset, &self.entry(spec.b).shape)?;
        tape.conv2d(x, w, b, spec.k / 2)
    }

    fn norm<'a>(&self, tape: &mut Tape<'a>, spec: &NormSpec, x: NodeId) -> Result<NodeId> {
        let gamma = tape.param(self.entry(spec.gamma).offset, &self.entry(spec.gamma).shape)?;
        let beta = tape.param(self.entry(spec.beta).offset, &self.entry(spec.beta).shape)?;
        tape.group_norm(x, gamma, beta, self.cfg.groups, GROUP_NORM_EPS)
    }

    fn linear<'a>(&self, tape: &mut Tape<'a>, spec: &LinearSpec, x: NodeId) -> Result<NodeId> {
        let w = tape.param(self.entry(spec.w).offset, &self.entry(spec.w).shape)?;
        let b = tape.param(self.entry(spec.b).offset, &self.entry(spec.b).shape)?;
        tape.linear(x, w, b)
    }

    fn res_block<'a>(
        &self,
        tape: &mut Tape<'a>,
        spec: &ResBlockSpec,
        x: NodeId,
        temb: NodeId,
    ) -> Result<NodeId> {
        let mut h = self.norm(tape, &spec.norm1, x)?;
        h = tape.silu(h);
        h = self.conv(tape, &spec.conv1, h)?;
        let t = self.linear(tape, &spec.time_proj, temb)?;
        h = tape.add_channel(h, t)?;
        h = self.norm(tape, &spec.norm2, h)?;
        h = tape.silu(h);
        h = self.conv(tape, &spec.conv2, h)?;
        let shortcut = match &spec.skip {
            Some(s) => self.conv(tape, s, x)?,
            None => x,
        };
        tape.add(h, shortcut)
    }

    /// Record a forward pass. Input is a `[1, H, W]` tensor; the output node
    /// has the same shape. `t` is the normalized time in [0, 1].
    pub fn forward<'a>(
        &self,
        tape: &mut Tape<'a>,
        input: Tensor,
        t: f64,
    ) -> Result<NodeId> {
        let (c, h, w) = input.chw()?;
        if c != 1 {
            return Err(NetError::invalid(format!("expected a single input channel, got {c}")));
        }
        let div = self.cfg.spatial_divisor();
        if h < div || w < div {
            return Err(NetError::architecture(format!(
                "input {h}x{w} too small: each spatial dim must be at least {div} \
                 (and is zero-padded to a multiple of {div})"
            )));
        }

        // Zero-pad to the required multiple, symmetric within one cell.
        let ph = h.next_multiple_of(div) - h;
        let pw = w.next_multiple_of(div) - w;
        let pads = (ph / 2, ph - ph / 2, pw / 2, pw - pw / 2);

        let mut x = tape.input(input);
        if ph > 0 || pw > 0 {
            x = tape.pad2d(x, pads)?;
        }

        // Shared time feature: sinusoid (constant) -> MLP (on tape).
        let sinus = time_embed(t, self.cfg.base_channels, self.cfg.time_multiplier)?;
        let mut temb = tape.input(Tensor::new(vec![self.cfg.base_channels], sinus)?);
        temb = self.linear(tape, &self.time_mlp1, temb)?;
        temb = tape.silu(temb);
        temb = self.linear(tape, &self.time_mlp2, temb)?;
        let temb = tape.silu(temb);

        let mut hcur = self.conv(tape, &self.stem, x)?;
        let levels = self.cfg.levels();
        let mut skips = Vec::with_capacity(levels);
        for (l, blocks) in self.enc.iter().enumerate() {
            for spec in blocks {
                hcur = self.res_block(tape, spec, hcur, temb)?;
            }
            skips.push(hcur);
            if l + 1 < levels {
                hcur = tape.downsample2(hcur)?;
            }
        }

        for spec in &self.mid {
            hcur = self.res_block(tape, spec, hcur, temb)?;
        }

        for l in (0..levels).rev() {
            hcur = tape.concat(hcur, skips[l])?;
            for spec in &self.dec[l] {
                hcur = self.res_block(tape, spec, hcur, temb)?;
            }
            if l > 0 {
                hcur = tape.upsample2(hcur)?;
            }
        }

        hcur = self.norm(tape, &self.out_norm, hcur)?;
        hcur = tape.silu(hcur);
        hcur = self.conv(tape, &self.out_conv, hcur)?;
        if ph > 0 || pw > 0 {
            hcur = tape.crop2d(hcur, (pads.0, pads.2), (h, w))?;
        }
        Ok(hcur)
    }

    /// Forward pass returning just the output tensor.
    pub fn evaluate(&self, params: &[f64], input: Tensor, t: f64) -> Result<Tensor> {
        self.check_params(params)?;
        let mut tape = Tape::new(params);
        let out = self.forward(&mut tape, input, t)?;
        Ok(tape.value(out).clone())
    }

    /// Forward plus reverse: returns the output and the flat parameter
    /// gradient for the given output cotangent.
    pub fn evaluate_with_grad(
        &self,
        params: &[f64],
        input: Tensor,
        t: f64,
        cotangent: &Tensor,
    ) -> Result<(Tensor, Vec<f64>)> {
        self.check_params(params)?;
        let mut tape = Tape::new(params);
        let out = self.forward(&mut tape, input, t)?;
        let (grads, _) = tape.backward(out, cotangent, self.n_params, None)?;
        Ok((tape.value(out).clone(), grads))
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(NetError::invalid(format!(
                "parameter vector has length {}, architecture needs {}",
                params.len(),
                self.n_params
            )));
        }
        Ok(())
    }
}
