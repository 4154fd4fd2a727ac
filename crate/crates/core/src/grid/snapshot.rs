//! `NFLD` binary snapshots.
//!
//! Layout (little-endian): magic `NFLD`, u8 version (1), u8 dim,
//! u8 components, u8 pad, 3 x u32 dims, 3 x f64 lengths, f64 time, then
//! `components * prod(dims)` f64 values, row-major with the component index
//! varying fastest.

use std::io::{self, Read, Write};
use std::sync::Arc;

use thiserror::Error;

use super::{Field, GridError, PeriodicGrid};

const MAGIC: &[u8; 4] = b"NFLD";
const VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not an NFLD snapshot")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    BadVersion(u8),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// A decoded snapshot: one field plus its time stamp.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub field: Field,
}

pub fn write_snapshot<W: Write>(mut w: W, field: &Field, time: f64) -> io::Result<()> {
    let g = field.grid();
    let ncomp = field.ncomp();
    let mut buf = Vec::with_capacity(64 + 8 * field.data().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&[VERSION, g.dim() as u8, ncomp as u8, 0]);
    for d in g.dims() {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for l in g.lengths() {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    buf.extend_from_slice(&time.to_le_bytes());
    for p in 0..g.len() {
        for c in 0..ncomp {
            buf.extend_from_slice(&field.at(c, p).to_le_bytes());
        }
    }
    w.write_all(&buf)
}

/// Reads a snapshot, building a fresh grid from the header.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot, SnapshotError> {
    let mut head = [0u8; 8];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    if head[4] != VERSION {
        return Err(SnapshotError::BadVersion(head[4]));
    }
    let dim = head[5] as usize;
    let ncomp = head[6] as usize;
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        *d = read_u32(&mut r)? as usize;
    }
    let mut lengths = [0f64; 3];
    for l in lengths.iter_mut() {
        *l = read_f64(&mut r)?;
    }
    let time = read_f64(&mut r)?;
    if !(2..=3).contains(&dim) {
        return Err(GridError::BadDimension(dim).into());
    }
    let grid: Arc<PeriodicGrid> = PeriodicGrid::new(&dims[..dim], &lengths[..dim])?;
    let n = grid.len();
    let mut field = Field::zeros(&grid, ncomp);
    for p in 0..n {
        for c in 0..ncomp {
            field.set(c, p, read_f64(&mut r)?);
        }
    }
    Ok(Snapshot { time, field })
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
