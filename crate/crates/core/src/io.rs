//! On-disk formats for velocity fields and shot gathers.
//!
//! Both are little-endian binary with a 4-byte ASCII magic and a u32
//! version. Samples are stored as f32 to halve file size; readers widen
//! back to f64. Field layout:
//!
//! ```text
//! "SFWI" | u32 version=1 | u32 nx | u32 nz | f64 dx | f64 dz | f32 values (depth-major, nz*nx)
//! "SGTH" | u32 version=1 | u32 n_shots | u32 n_receivers | u32 nt | f64 dt | f32 data [shot][receiver][time]
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, Array3};

use crate::{CoreError, Grid2D, Result, ShotGather, VelocityModel};

const FIELD_MAGIC: &[u8; 4] = b"SFWI";
const GATHER_MAGIC: &[u8; 4] = b"SGTH";
const FORMAT_VERSION: u32 = 1;

/// Guard against corrupt headers asking for absurd allocations.
const MAX_ELEMENTS: u64 = 1 << 31;

pub fn save_field(path: &Path, model: &VelocityModel) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let grid = model.grid();
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(grid.nx as u32).to_le_bytes())?;
    w.write_all(&(grid.nz as u32).to_le_bytes())?;
    w.write_all(&grid.dx.to_le_bytes())?;
    w.write_all(&grid.dz.to_le_bytes())?;
    for &v in model.values().iter() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<VelocityModel> {
    let mut r = Reader::new(BufReader::new(File::open(path)?));
    r.expect_magic(FIELD_MAGIC)?;
    r.expect_version(FORMAT_VERSION)?;
    let nx = r.read_u32()? as usize;
    let nz = r.read_u32()? as usize;
    let dx = r.read_f64()?;
    let dz = r.read_f64()?;
    if (nx as u64) * (nz as u64) > MAX_ELEMENTS {
        return Err(CoreError::format(8, format!("field dimensions {nx}x{nz} too large")));
    }
    let grid = Grid2D::new(nx, nz, dx, dz)
        .map_err(|e| CoreError::format(8, format!("invalid grid in header: {e}")))?;
    let values = r.read_f32_array(nz * nx)?;
    r.expect_eof()?;
    let values = Array2::from_shape_vec((nz, nx), values)
        .expect("length checked against header dimensions");
    VelocityModel::new(grid, values)
        .map_err(|e| CoreError::format(32, format!("invalid field payload: {e}")))
}

pub fn save_gather(path: &Path, gather: &ShotGather) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let (n_shots, n_receivers, nt) = gather.data.dim();
    w.write_all(GATHER_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(n_shots as u32).to_le_bytes())?;
    w.write_all(&(n_receivers as u32).to_le_bytes())?;
    w.write_all(&(nt as u32).to_le_bytes())?;
    w.write_all(&gather.dt.to_le_bytes())?;
    for &v in gather.data.iter() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_gather(path: &Path) -> Result<ShotGather> {
    let mut r = Reader::new(BufReader::new(File::open(path)?));
    r.expect_magic(GATHER_MAGIC)?;
    r.expect_version(FORMAT_VERSION)?;
    let n_shots = r.read_u32()? as usize;
    let n_receivers = r.read_u32()? as usize;
    let nt = r.read_u32()? as usize;
    let dt = r.read_f64()?;
    let total = (n_shots as u64) * (n_receivers as u64) * (nt as u64);
    if total > MAX_ELEMENTS {
        return Err(CoreError::format(
            8,
            format!("gather dimensions {n_shots}x{n_receivers}x{nt} too large"),
        ));
    }
    let data = r.read_f32_array(total as usize)?;
    r.expect_eof()?;
    let data = Array3::from_shape_vec((n_shots, n_receivers, nt), data)
        .expect("length checked against header dimensions");
    ShotGather::new(data, dt)
        .map_err(|e| CoreError::format(20, format!("invalid gather payload: {e}")))
}

/// Tracks the byte offset so format errors point at the corrupt field.
struct Reader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Reader<R> {
    fn new(inner: R) -> Self {
        Reader { inner, offset: 0 }
    }

    fn read_exact(&mut self, buf: &mut [u8]) -> Result<()> {
        let at = self.offset;
        self.inner.read_exact(buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                CoreError::format(at, "file truncated".to_string())
            } else {
                CoreError::Io(e)
            }
        })?;
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn expect_magic(&mut self, magic: &[u8; 4]) -> Result<()> {
        let mut got = [0u8; 4];
        self.read_exact(&mut got)?;
        if &got != magic {
            return Err(CoreError::format(
                0,
                format!(
                    "bad magic: expected {:?}, got {:?}",
                    String::from_utf8_lossy(magic),
                    String::from_utf8_lossy(&got)
                ),
            ));
        }
        Ok(())
    }

    fn expect_version(&mut self, version: u32) -> Result<()> {
        let at = self.offset;
        let got = self.read_u32()?;
        if got != version {
            return Err(CoreError::format(
                at,
                format!("unsupported version {got}, expected {version}"),
            ));
        }
        Ok(())
    }

    fn read_u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    fn read_f64(&mut self) -> Result<f64> {
        let at = self.offset;
        let mut b = [0u8; 8];
        self.read_exact(&mut b)?;
        let v = f64::from_le_bytes(b);
        if !v.is_finite() {
            return Err(CoreError::format(at, format!("non-finite header value {v}")));
        }
        Ok(v)
    }

    fn read_f32_array(&mut self, n: usize) -> Result<Vec<f64>> {
        let mut bytes = vec![0u8; n * 4];
        self.read_exact(&mut bytes)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect())
    }

    fn expect_eof(&mut self) -> Result<()> {
        let mut b = [0u8; 1];
        match self.inner.read(&mut b)? {
            0 => Ok(()),
            _ => Err(CoreError::format(self.offset, "trailing bytes after payload".to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    fn sample_model() -> VelocityModel {
        let grid = Grid2D::new(12, 9, 10.0, 12.5).unwrap();
        let values = Array2::from_shape_fn((9, 12), |(iz, ix)| 1500.0 + iz as f64 * 10.0 + ix as f64);
        VelocityModel::new(grid, values).unwrap()
    }

    #[test]
    fn field_roundtrip_preserves_grid_and_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.sfwi");
        let m = sample_model();
        save_field(&path, &m).unwrap();
        let back = load_field(&path).unwrap();
        assert_eq!(back.grid(), m.grid());
        // Values pass through f32, so compare at f32 precision.
        for (a, b) in back.values().iter().zip(m.values().iter()) {
            assert_eq!(*a, *b as f32 as f64);
        }
    }

    #[test]
    fn gather_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.sgth");
        let data = Array3::from_shape_fn((3, 4, 7), |(s, r, t)| {
            (s as f64 - 1.0) * 0.25 + r as f64 * 0.5 + t as f64 * 0.125
        });
        let g = ShotGather::new(data, 8.0e-4).unwrap();
        save_gather(&path, &g).unwrap();
        let back = load_gather(&path).unwrap();
        assert_eq!(back.dt, g.dt);
        assert_eq!(back.data.dim(), g.data.dim());
        for (a, b) in back.data.iter().zip(g.data.iter()) {
            assert_eq!(*a, *b as f32 as f64);
        }
    }

    #[test]
    fn bad_magic_reports_offset_zero() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.sfwi");
        std::fs::write(&path, b"NOPE\x01\x00\x00\x00").unwrap();
        match load_field(&path) {
            Err(CoreError::Format { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trunc.sfwi");
        let m = sample_model();
        save_field(&path, &m).unwrap();
        let full = std::fs::read(&path).unwrap();
        std::fs::write(&path, &full[..full.len() - 10]).unwrap();
        match load_field(&path) {
            Err(CoreError::Format { offset, message }) => {
                assert!(message.contains("truncated"));
                assert!(offset >= 32, "payload starts at byte 32, got offset {offset}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v9.sfwi");
        let m = sample_model();
        save_field(&path, &m).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 9;
        std::fs::write(&path, &bytes).unwrap();
        match load_field(&path) {
            Err(CoreError::Format { offset, message }) => {
                assert_eq!(offset, 4);
                assert!(message.contains("version"));
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn trailing_bytes_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tail.sfwi");
        let m = sample_model();
        save_field(&path, &m).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_field(&path), Err(CoreError::Format { .. })));
    }
}
