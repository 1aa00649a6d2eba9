//! Binary matrix files.
//!
//! Layout, all little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "EFCM"
//! 4       2     format version (currently 1)
//! 6       1     dtype tag (1 = f64)
//! 7       8     rows (u64)
//! 15      8     cols (u64)
//! 23      ...   row-major f64 payload
//! ```
//!
//! The format exists because connectivity matrices must survive a write/read
//! cycle bit-exactly; text formats round.

use std::fs;
use std::path::Path;

use efcnet_core::Mat;

use crate::error::{AppError, Result};

pub const MAGIC: &[u8; 4] = b"EFCM";
pub const VERSION: u16 = 1;
pub const DTYPE_F64: u8 = 1;
const HEADER_LEN: usize = 23;

pub fn write_matrix(path: &Path, m: &Mat) -> Result<()> {
    let (rows, cols) = m.dims();
    let mut buf = Vec::with_capacity(HEADER_LEN + m.as_slice().len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(DTYPE_F64);
    buf.extend_from_slice(&(rows as u64).to_le_bytes());
    buf.extend_from_slice(&(cols as u64).to_le_bytes());
    for v in m.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf).map_err(AppError::io(path))
}

pub fn read_matrix(path: &Path) -> Result<Mat> {
    let bytes = fs::read(path).map_err(AppError::io(path))?;
    if bytes.len() < HEADER_LEN {
        return Err(AppError::format(
            path,
            "file shorter than the 23-byte header",
        ));
    }
    if &bytes[0..4] != MAGIC {
        return Err(AppError::format(
            path,
            format!("bad magic {:02x?}, expected \"EFCM\"", &bytes[0..4]),
        ));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(AppError::format(
            path,
            format!("unsupported format version {version}, expected {VERSION}"),
        ));
    }
    if bytes[6] != DTYPE_F64 {
        return Err(AppError::format(
            path,
            format!(
                "unsupported dtype tag {}, expected {DTYPE_F64} (f64)",
                bytes[6]
            ),
        ));
    }
    let rows = u64::from_le_bytes(bytes[7..15].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(bytes[15..23].try_into().unwrap()) as usize;
    let expected = HEADER_LEN
        + rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| AppError::format(path, "matrix dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(AppError::format(
            path,
            format!(
                "payload length mismatch: {} bytes for a {rows}x{cols} matrix, expected {expected}",
                bytes.len()
            ),
        ));
    }

    let data: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Mat::from_vec(rows, cols, data))
}
