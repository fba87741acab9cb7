//! Binary checkpoints: a versioned header, the configuration as JSON and the
//! full-grid coefficients.
//!
//! Layout (little-endian): magic `b"EXPDCKPT"`, `u32` version, `u64` JSON
//! length, JSON bytes, `f64` time, `u64` n, then `3 n³` pairs `(re, im)` of
//! `f64`, component-major, modes in row-major FFT index order.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::config::SimConfig;
use crate::error::{CoreError, Result};
use crate::spectral::SpectralVectorField;

pub const MAGIC: &[u8; 8] = b"EXPDCKPT";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: SimConfig,
    pub t: f64,
    pub field: SpectralVectorField,
}

pub fn write_checkpoint(w: &mut impl Write, config: &SimConfig, t: f64, u: &SpectralVectorField) -> Result<()> {
    let json = serde_json::to_vec(config)?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    w.write_all(&t.to_le_bytes())?;
    w.write_all(&(u.grid().n() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(u.grid().len() * 16);
    for comp in u.coeffs() {
        buf.clear();
        for z in comp {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| CoreError::Checkpoint(format!("truncated file: {e}")))?;
    Ok(b)
}

pub fn read_checkpoint(r: &mut impl Read) -> Result<Checkpoint> {
    if &read_array::<8>(r)? != MAGIC {
        return Err(CoreError::Checkpoint("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(r)?);
    if version != VERSION {
        return Err(CoreError::Checkpoint(format!("unsupported version {version}")));
    }
    let len = u64::from_le_bytes(read_array(r)?) as usize;
    if len > 1 << 24 {
        return Err(CoreError::Checkpoint(format!("implausible header length {len}")));
    }
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)
        .map_err(|e| CoreError::Checkpoint(format!("truncated header: {e}")))?;
    let config: SimConfig = serde_json::from_slice(&json)?;
    let t = f64::from_le_bytes(read_array(r)?);
    let n = u64::from_le_bytes(read_array(r)?) as usize;
    let grid = config.grid()?;
    if n != grid.n() {
        return Err(CoreError::GridMismatch {
            expected: grid.n(),
            found: n,
        });
    }
    let mut raw = vec![0u8; grid.len() * 16];
    let mut coeffs: [Vec<Complex64>; 3] = Default::default();
    for comp in coeffs.iter_mut() {
        r.read_exact(&mut raw)
            .map_err(|e| CoreError::Checkpoint(format!("truncated coefficients: {e}")))?;
        *comp = raw
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
    }
    let mut field = SpectralVectorField::from_coeffs(grid, coeffs)?;
    // a checkpoint of a solver state is solenoidal; others load unflagged
    let _ = field.mark_divfree();
    Ok(Checkpoint { config, t, field })
}

pub fn save_checkpoint(path: &Path, config: &SimConfig, t: f64, u: &SpectralVectorField) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint(&mut f, config, t, u)?;
    f.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    read_checkpoint(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}
