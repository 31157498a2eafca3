//! Network checkpoint files. Layout, little-endian throughout:
//!
//! ```text
//! magic "SFNP" | version u32 | base u32 | n_mults u32 | mults u32 * n
//! | blocks u32 | groups u32 | time_multiplier f64 | mean f64 | scale f64
//! | n_params u64 | payload f32 * n_params
//! ```
//!
//! Parameters are stored in f32; loading widens back to f64. The
//! normalization constants ride along because the weights only reproduce
//! the same physical-units function together with them.

use std::fs;
use std::path::Path;

use crate::flow::Normalization;
use crate::unet::{FlowNet, NetConfig};
use crate::{NetError, Result};

const MAGIC: &[u8; 4] = b"SFNP";
const VERSION: u32 = 1;
const MAX_LEVELS: usize = 16;
const MAX_PARAMS: u64 = 1 << 30;

/// Serializes a parameter vector with the architecture and normalization
/// needed to rebuild the network it belongs to.
pub fn save_params(
    path: &Path,
    cfg: &NetConfig,
    norm: Normalization,
    params: &[f64],
) -> Result<()> {
    cfg.validate()?;
    let net = FlowNet::new(cfg.clone())?;
    if params.len() != net.n_params() {
        return Err(NetError::invalid(format!(
            "parameter vector has {} entries, architecture needs {}",
            params.len(),
            net.n_params()
        )));
    }
    if cfg.channel_mults.len() > MAX_LEVELS {
        return Err(NetError::invalid(format!(
            "at most {MAX_LEVELS} resolution levels are supported"
        )));
    }
    let mut bytes = Vec::with_capacity(64 + params.len() * 4);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(cfg.base_channels as u32).to_le_bytes());
    bytes.extend_from_slice(&(cfg.channel_mults.len() as u32).to_le_bytes());
    for &m in &cfg.channel_mults {
        bytes.extend_from_slice(&(m as u32).to_le_bytes());
    }
    bytes.extend_from_slice(&(cfg.blocks_per_level as u32).to_le_bytes());
    bytes.extend_from_slice(&(cfg.groups as u32).to_le_bytes());
    bytes.extend_from_slice(&cfg.time_multiplier.to_le_bytes());
    bytes.extend_from_slice(&norm.mean.to_le_bytes());
    bytes.extend_from_slice(&norm.scale.to_le_bytes());
    bytes.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for &p in params {
        bytes.extend_from_slice(&(p as f32).to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads a checkpoint back, validating the architecture descriptor against
/// what the network builder actually produces.
pub fn load_params(path: &Path) -> Result<(NetConfig, Normalization, Vec<f64>)> {
    let bytes = fs::read(path)?;
    let mut r = Reader { bytes: &bytes, pos: 0 };

    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(NetError::format(0, format!("bad magic {magic:?}, expected {MAGIC:?}")));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(NetError::format(
            r.pos as u64 - 4,
            format!("unsupported version {version}, expected {VERSION}"),
        ));
    }
    let base_channels = r.u32("base channel count")? as usize;
    let n_mults_at = r.pos as u64;
    let n_mults = r.u32("level count")? as usize;
    if n_mults == 0 || n_mults > MAX_LEVELS {
        return Err(NetError::format(
            n_mults_at,
            format!("level count {n_mults} outside 1..={MAX_LEVELS}"),
        ));
    }
    let mut channel_mults = Vec::with_capacity(n_mults);
    for _ in 0..n_mults {
        channel_mults.push(r.u32("channel multiplier")? as usize);
    }
    let blocks_per_level = r.u32("blocks per level")? as usize;
    let groups = r.u32("group count")? as usize;
    let time_multiplier = r.f64("time multiplier")?;
    let mean = r.f64("normalization mean")?;
    let scale = r.f64("normalization scale")?;
    if !(scale > 0.0 && scale.is_finite() && mean.is_finite()) {
        return Err(NetError::format(
            r.pos as u64 - 16,
            format!("normalization (mean {mean}, scale {scale}) is not usable"),
        ));
    }

    let cfg = NetConfig { base_channels, channel_mults, blocks_per_level, groups, time_multiplier };
    let net = FlowNet::new(cfg.clone()).map_err(|e| {
        NetError::format(8, format!("architecture descriptor is invalid: {e}"))
    })?;

    let count_at = r.pos as u64;
    let n_params = r.u64("parameter count")?;
    if n_params > MAX_PARAMS {
        return Err(NetError::format(
            count_at,
            format!("parameter count {n_params} exceeds limit {MAX_PARAMS}"),
        ));
    }
    if n_params as usize != net.n_params() {
        return Err(NetError::format(
            count_at,
            format!(
                "parameter count {n_params} does not match the {} the architecture defines",
                net.n_params()
            ),
        ));
    }
    let mut params = Vec::with_capacity(n_params as usize);
    for _ in 0..n_params {
        params.push(r.f32("parameter payload")? as f64);
    }
    if r.pos != bytes.len() {
        return Err(NetError::format(
            r.pos as u64,
            format!("{} trailing bytes after the payload", bytes.len() - r.pos),
        ));
    }
    Ok((cfg, Normalization { mean, scale }, params))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(NetError::format(
                self.pos as u64,
                format!("file truncated while reading {what}"),
            ));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}
