//! Operator export.
//!
//! Binary layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `TOPR` |
//! | 4 | `u32` version (1) |
//! | 8 | `u64` rows |
//! | 8 | `u64` cols |
//! | 8 | `f64` h |
//! | 16 per entry | row-major `(re, im)` as `f64` |

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{PhaseError, Result, TorusOperator};
use crate::linalg::CMat;

pub const OPERATOR_MAGIC: &[u8; 4] = b"TOPR";
pub const OPERATOR_VERSION: u32 = 1;

/// Largest dimension accepted by [`write_operator_csv`].
pub const MAX_CSV_DIM: usize = 256;

pub fn write_operator<W: Write>(op: &TorusOperator, mut w: W) -> Result<()> {
    let m = op.entries();
    w.write_all(OPERATOR_MAGIC)?;
    w.write_all(&OPERATOR_VERSION.to_le_bytes())?;
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    w.write_all(&op.h().to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * m.ncols());
    for i in 0..m.nrows() {
        buf.clear();
        for j in 0..m.ncols() {
            buf.extend_from_slice(&m[(i, j)].re.to_le_bytes());
            buf.extend_from_slice(&m[(i, j)].im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_operator<R: Read>(mut r: R) -> Result<TorusOperator> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != OPERATOR_MAGIC {
        return Err(PhaseError::Format("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != OPERATOR_VERSION {
        return Err(PhaseError::Format(format!("unsupported version {version}")));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let rows = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let cols = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let h = f64::from_le_bytes(b8);
    if rows != cols || rows == 0 || rows > 1 << 16 {
        return Err(PhaseError::Format(format!("bad shape {rows}x{cols}")));
    }
    let mut data = vec![0u8; rows * cols * 16];
    r.read_exact(&mut data)?;
    let val = |k: usize| f64::from_le_bytes(data[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    let m = CMat::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        Complex64::new(val(k), val(k + 1))
    });
    let op = TorusOperator::new(m);
    if (op.h() - h).abs() > 1e-15 * h.abs().max(1.0) {
        return Err(PhaseError::Format(format!("h = {h} does not match dimension {rows}")));
    }
    Ok(op)
}

/// CSV with header `row,col,re,im`, one line per entry.
pub fn write_operator_csv<W: Write>(op: &TorusOperator, w: W) -> Result<()> {
    if op.dim() > MAX_CSV_DIM {
        return Err(PhaseError::BadDimension(format!(
            "CSV export is limited to N <= {MAX_CSV_DIM}"
        )));
    }
    let mut wr = csv::Writer::from_writer(w);
    let to_io = |e: csv::Error| PhaseError::Io(std::io::Error::other(e));
    wr.write_record(["row", "col", "re", "im"]).map_err(to_io)?;
    let m = op.entries();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            wr.write_record([i.to_string(), j.to_string(), format!("{:e}", z.re), format!("{:e}", z.im)])
                .map_err(to_io)?;
        }
    }
    wr.flush()?;
    Ok(())
}
