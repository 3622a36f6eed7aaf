//! Binary checkpoints.
//!
//! Little-endian layout: magic `FMHD`, version `u32`, `n` `u32`,
//! `box_length` `f64`, `time` `f64`, then the coefficient cubes of `v`, `B`
//! and `m` as interleaved `f64` real/imaginary pairs in
//! `(component, kx, ky, kz)` order.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{SpectralField, StateVector};
use crate::grid::Grid;

pub const MAGIC: [u8; 4] = *b"FMHD";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

pub fn encode(s: &StateVector) -> Vec<u8> {
    let g = s.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 3 * 3 * g.len() * 16);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.box_length().to_le_bytes());
    out.extend_from_slice(&s.time.to_le_bytes());
    for f in s.fields() {
        for c in f.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

/// The dealias fraction is not stored; `dealias_fraction` supplies it.
pub fn decode(bytes: &[u8], dealias_fraction: f64) -> Result<StateVector> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Checkpoint("truncated header".into()));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let n = u32_at(8) as usize;
    let grid = Grid::new(n, f64_at(12), dealias_fraction)?;
    let time = f64_at(20);
    let per_field = 3 * grid.len();
    let expected = HEADER_LEN + 3 * per_field * 16;
    if bytes.len() != expected {
        return Err(Error::Checkpoint(format!(
            "expected {expected} bytes for n = {n}, found {}",
            bytes.len()
        )));
    }
    let mut fields = Vec::with_capacity(3);
    for f in 0..3 {
        let base = HEADER_LEN + f * per_field * 16;
        let coeffs: Vec<Complex64> = (0..per_field)
            .map(|i| Complex64::new(f64_at(base + 16 * i), f64_at(base + 16 * i + 8)))
            .collect();
        fields.push(SpectralField::from_coeffs(grid, coeffs)?);
    }
    let m = fields.pop().unwrap();
    let b = fields.pop().unwrap();
    let v = fields.pop().unwrap();
    StateVector::new(v, b, m, time)
}

pub fn write(path: &Path, s: &StateVector) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(s))?;
    Ok(())
}

pub fn read(path: &Path, dealias_fraction: f64) -> Result<StateVector> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes, dealias_fraction)
}

/// `dir/step_000042.fmhd`
pub fn path_for_step(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("step_{step:06}.fmhd"))
}
