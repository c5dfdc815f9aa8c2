//! Deterministic output formats: binary spectral snapshots, CSV series,
//! and the JSON verdict report.
//!
//! Snapshot layout (all little-endian): magic "PECF", format version
//! u32, n u32, L f64, t f64, α f64, ε f64, then n×n coefficient pairs
//! (re, im) as f64, row-major with m₁ outer and m₂ inner, each running
//! from −n/2 to n/2−1.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

const MAGIC: &[u8; 4] = b"PECF";
const FORMAT_VERSION: u32 = 1;

/// Physical parameters stamped into a snapshot header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub t: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

pub fn write_snapshot(path: &Path, header: &SnapshotHeader, field: &SpectralField) -> Result<()> {
    let grid = field.grid();
    let n = grid.n();
    let mut buf = Vec::with_capacity(4 + 4 + 4 + 8 * 4 + 16 * n * n);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    buf.extend_from_slice(&grid.box_length().to_le_bytes());
    buf.extend_from_slice(&header.t.to_le_bytes());
    buf.extend_from_slice(&header.alpha.to_le_bytes());
    buf.extend_from_slice(&header.epsilon.to_le_bytes());
    let half = n as i64 / 2;
    for m1 in -half..half {
        for m2 in -half..half {
            let c = field.coeff(m1, m2);
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, SpectralField)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut cursor = 0usize;
    let take = |cursor: &mut usize, len: usize| -> Result<&[u8]> {
        if *cursor + len > bytes.len() {
            return Err(Error::SnapshotFormat(format!(
                "{} truncated at byte {}",
                path.display(),
                cursor
            )));
        }
        let slice = &bytes[*cursor..*cursor + len];
        *cursor += len;
        Ok(slice)
    };
    let magic = take(&mut cursor, 4)?;
    if magic != MAGIC {
        return Err(Error::SnapshotFormat(format!(
            "{}: bad magic",
            path.display()
        )));
    }
    let read_u32 =
        |c: &mut usize| -> Result<u32> { Ok(u32::from_le_bytes(take(c, 4)?.try_into().unwrap())) };
    let read_f64 =
        |c: &mut usize| -> Result<f64> { Ok(f64::from_le_bytes(take(c, 8)?.try_into().unwrap())) };
    let version = read_u32(&mut cursor)?;
    if version != FORMAT_VERSION {
        return Err(Error::SnapshotFormat(format!(
            "{}: unsupported format version {version}",
            path.display()
        )));
    }
    let n = read_u32(&mut cursor)? as usize;
    let box_length = read_f64(&mut cursor)?;
    let header = SnapshotHeader {
        t: read_f64(&mut cursor)?,
        alpha: read_f64(&mut cursor)?,
        epsilon: read_f64(&mut cursor)?,
    };
    let grid = Grid::new(n, box_length)
        .map_err(|e| Error::SnapshotFormat(format!("{}: {e}", path.display())))?;
    let mut field = SpectralField::zeros(&grid);
    let half = n as i64 / 2;
    for m1 in -half..half {
        for m2 in -half..half {
            let re = read_f64(&mut cursor)?;
            let im = read_f64(&mut cursor)?;
            field.set_coeff(m1, m2, Complex64::new(re, im));
        }
    }
    if cursor != bytes.len() {
        return Err(Error::SnapshotFormat(format!(
            "{}: {} trailing bytes",
            path.display(),
            bytes.len() - cursor
        )));
    }
    Ok((header, field))
}
