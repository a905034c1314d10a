//! Binary checkpoint: "NSAP", u32 version, u32 N, u32 n, f64 L, f64 t, then
//! N real-space component arrays (row-major, axis 0 slowest), all little-endian.

use std::io::{Read, Write};
use std::path::Path;

use super::field::{ScalarField, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"NSAP";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_checkpoint(path: &Path, u: &VectorField, t: f64) -> Result<()> {
    let g = u.grid();
    let mut buf = Vec::with_capacity(32 + 8 * g.dim() * g.real_len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(g.n() as u32).to_le_bytes());
    buf.extend_from_slice(&g.box_length().to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    for c in u.components() {
        for v in c.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

/// Reads a checkpoint; the solenoidal flag is set only if the stored field
/// passes the divergence invariant.
pub fn read_checkpoint(path: &Path) -> Result<(VectorField, f64)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 32 || &bytes[..4] != MAGIC {
        return Err(Error::Checkpoint("missing NSAP header".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let grid = Grid::new(u32_at(8) as usize, u32_at(12) as usize, f64_at(16))?;
    let t = f64_at(24);
    let len = grid.real_len();
    if bytes.len() != 32 + 8 * grid.dim() * len {
        return Err(Error::Checkpoint(format!(
            "payload size {} does not match grid",
            bytes.len() - 32
        )));
    }
    let comps = (0..grid.dim())
        .map(|a| {
            let base = 32 + 8 * a * len;
            ScalarField::from_values(grid, (0..len).map(|i| f64_at(base + 8 * i)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let u = VectorField::from_components(comps)?;
    let u = if u.divergence_residual() <= 1e-10 {
        u.with_flag(true)
    } else {
        u
    };
    Ok((u, t))
}
