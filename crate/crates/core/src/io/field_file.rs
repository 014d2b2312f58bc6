use std::fs;
use std::io::Read;
use std::path::Path;

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid2D;

pub const MAGIC: &[u8; 8] = b"DS2DFLD1";
const HEADER: usize = 8 + 4 + 4 + 8 + 8;

/// Contents of a DS2DFLD1 file before grid validation.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub nx: u32,
    pub ny: u32,
    pub lx: f64,
    pub ly: f64,
    pub values: Vec<C>,
}

impl FieldFile {
    pub fn from_field(u: &ComplexField) -> Self {
        let g = u.grid();
        Self { nx: g.nx() as u32, ny: g.ny() as u32, lx: g.lx(), ly: g.ly(), values: u.values().to_vec() }
    }

    /// Whether the dimensions meet the grid requirements of the spectral
    /// operators.
    pub fn spectral_ready(&self) -> bool {
        Grid2D::new(self.nx as usize, self.ny as usize, self.lx, self.ly).is_ok()
    }

    pub fn into_field(self) -> Result<ComplexField> {
        let grid = Grid2D::new(self.nx as usize, self.ny as usize, self.lx, self.ly)?;
        ComplexField::from_values(&grid, self.values)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER + 16 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.nx.to_le_bytes());
        out.extend_from_slice(&self.ny.to_le_bytes());
        out.extend_from_slice(&self.lx.to_le_bytes());
        out.extend_from_slice(&self.ly.to_le_bytes());
        for c in &self.values {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() < HEADER {
            return Err(Error::Format(format!("{} bytes is shorter than the header", b.len())));
        }
        if &b[..8] != MAGIC {
            return Err(Error::Format("bad magic, expected DS2DFLD1".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(b[i..i + 4].try_into().unwrap());
        let f64_at = |i: usize| f64::from_le_bytes(b[i..i + 8].try_into().unwrap());
        let (nx, ny) = (u32_at(8), u32_at(12));
        let (lx, ly) = (f64_at(16), f64_at(24));
        let payload = (nx as usize)
            .checked_mul(ny as usize)
            .and_then(|n| n.checked_mul(16))
            .ok_or_else(|| Error::Format(format!("dimensions {nx} x {ny} overflow")))?;
        if b.len() - HEADER != payload {
            return Err(Error::Format(format!(
                "payload is {} bytes, expected {payload} for {nx} x {ny}",
                b.len() - HEADER
            )));
        }
        let values = b[HEADER..]
            .chunks_exact(16)
            .map(|c| {
                C::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap()))
            })
            .collect();
        Ok(Self { nx, ny, lx, ly, values })
    }
}

pub fn write_field(path: impl AsRef<Path>, u: &ComplexField) -> Result<()> {
    fs::write(path, FieldFile::from_field(u).to_bytes())?;
    Ok(())
}

/// Read and validate a field file; the grid is not checked. The header and
/// file length are checked before the payload is read.
pub fn read_field_file(path: impl AsRef<Path>) -> Result<FieldFile> {
    let mut f = fs::File::open(path)?;
    let len = f.metadata()?.len();
    let mut head = [0u8; HEADER];
    if len < HEADER as u64 {
        return Err(Error::Format(format!("{len} bytes is shorter than the header")));
    }
    f.read_exact(&mut head)?;
    if &head[..8] != MAGIC {
        return Err(Error::Format("bad magic, expected DS2DFLD1".into()));
    }
    let nx = u32::from_le_bytes(head[8..12].try_into().unwrap()) as u64;
    let ny = u32::from_le_bytes(head[12..16].try_into().unwrap()) as u64;
    let want = nx.checked_mul(ny).and_then(|n| n.checked_mul(16)).and_then(|n| n.checked_add(HEADER as u64));
    if want != Some(len) {
        return Err(Error::Format(format!("file is {len} bytes, which does not match {nx} x {ny}")));
    }
    let mut bytes = head.to_vec();
    f.read_to_end(&mut bytes)?;
    FieldFile::from_bytes(&bytes)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<ComplexField> {
    read_field_file(path)?.into_field()
}
