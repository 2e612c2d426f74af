//! Binary field snapshots ("TCMF").
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic      4 bytes  "TCMF"
//! version    u16      currently 1
//! dim        u32
//! n          u32      points per axis
//! l          f64      lattice scale L
//! components u32
//! data       components × N^d × (re f64, im f64), row-major FFT-order lattice
//! ```
//!
//! Coefficients are stored in the continuous Fourier convention used by
//! [`SpectralField`]. The dealiasing fraction is not part of the format; readers
//! supply it.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::io::atomic_write;

pub const MAGIC: &[u8; 4] = b"TCMF";
pub const VERSION: u16 = 1;

pub fn write_snapshot<W: Write>(mut out: W, field: &SpectralField) -> Result<()> {
    let grid = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    out.write_all(&(grid.n() as u32).to_le_bytes())?;
    out.write_all(&grid.l().to_le_bytes())?;
    out.write_all(&(field.n_components() as u32).to_le_bytes())?;
    for c in field.components() {
        for v in c {
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut input: R, dealias_fraction: f64) -> Result<SpectralField> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut b2 = [0u8; 2];
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b2)?;
    let version = u16::from_le_bytes(b2);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    input.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    input.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    input.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    input.read_exact(&mut b4)?;
    let ncomp = u32::from_le_bytes(b4) as usize;
    if ncomp == 0 || ncomp > 3 {
        return Err(Error::Format(format!("component count {ncomp} not in 1..=3")));
    }
    let grid = TorusGrid::with_dealias(dim, n, l, dealias_fraction)
        .map_err(|e| Error::Format(e.to_string()))?;
    let mut comps = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let mut c = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            input.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            input.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            c.push(Complex64::new(re, im));
        }
        comps.push(c);
    }
    if input.read(&mut b8)? != 0 {
        return Err(Error::Format("trailing bytes after coefficient data".into()));
    }
    SpectralField::from_coefficients(&grid, comps)
}

pub fn save_snapshot(path: &Path, field: &SpectralField) -> Result<()> {
    let mut failure = None;
    atomic_write(path, |w| {
        write_snapshot(&mut *w, field).map_err(|e| {
            let msg = e.to_string();
            failure = Some(e);
            std::io::Error::other(msg)
        })
    })
    .map_err(|e| failure.take().unwrap_or(e))
}

pub fn load_snapshot(path: &Path, dealias_fraction: f64) -> Result<SpectralField> {
    read_snapshot(BufReader::new(File::open(path)?), dealias_fraction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_fixed() {
        let grid = TorusGrid::new(2, 16, 2.5).unwrap();
        let mut f = SpectralField::scalar_zeros(&grid);
        f.component_mut(0)[3] = Complex64::new(1.5, -0.25);
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &f).unwrap();
        assert_eq!(&bytes[..4], b"TCMF");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(u32::from_le_bytes(bytes[6..10].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[10..14].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(bytes[14..22].try_into().unwrap()), 2.5);
        assert_eq!(u32::from_le_bytes(bytes[22..26].try_into().unwrap()), 1);
        assert_eq!(bytes.len(), 26 + 16 * 16 * 16);
        let off = 26 + 3 * 16;
        assert_eq!(f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()), 1.5);
        assert_eq!(f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap()), -0.25);

        let back = read_snapshot(bytes.as_slice(), 2.0 / 3.0).unwrap();
        assert_eq!(back.component(0), f.component(0));
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(read_snapshot(&b"XXXX"[..], 1.0).is_err());
        let grid = TorusGrid::new(2, 16, 1.0).unwrap();
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &SpectralField::scalar_zeros(&grid)).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(read_snapshot(bytes.as_slice(), 1.0).is_err());
    }
}
