//! Trained-model checkpoints.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! magic "EFCC" | version u16 | kind u8 | tensor count u8
//! then per tensor: rows u64 | cols u64 | row-major f64 payload
//! ```
//!
//! Kind 1 is the co-embedding model (6 tensors), kind 2 the GCN baseline
//! (5 tensors), with tensors in the models' fixed parameter order.

use std::fs;
use std::path::Path;

use efcnet_core::model::{GcnParams, LayerWeights, ModelParams, TrainedModel};
use efcnet_core::Mat;

use crate::error::{AppError, Result};

pub const MAGIC: &[u8; 4] = b"EFCC";
pub const VERSION: u16 = 1;
const KIND_CO: u8 = 1;
const KIND_GCN: u8 = 2;

pub fn save_checkpoint(path: &Path, model: &TrainedModel) -> Result<()> {
    let (kind, tensors): (u8, Vec<&Mat>) = match model {
        TrainedModel::CoEmbedding(p) => (KIND_CO, p.tensors().to_vec()),
        TrainedModel::GcnBaseline(p) => (KIND_GCN, p.tensors().to_vec()),
    };
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(kind);
    buf.push(tensors.len() as u8);
    for t in &tensors {
        buf.extend_from_slice(&(t.rows() as u64).to_le_bytes());
        buf.extend_from_slice(&(t.cols() as u64).to_le_bytes());
        for v in t.as_slice() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(AppError::io(path))
}

pub fn load_checkpoint(path: &Path) -> Result<TrainedModel> {
    let bytes = fs::read(path).map_err(AppError::io(path))?;
    if bytes.len() < 8 {
        return Err(AppError::format(
            path,
            "file shorter than the checkpoint header",
        ));
    }
    if &bytes[0..4] != MAGIC {
        return Err(AppError::format(
            path,
            format!(
                "bad magic {:02x?}: not an \"EFCC\" version-{VERSION} checkpoint",
                &bytes[0..4]
            ),
        ));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(AppError::format(
            path,
            format!("unsupported checkpoint version {version}, expected {VERSION}"),
        ));
    }
    let kind = bytes[6];
    let n_tensors = bytes[7] as usize;
    let expected = match kind {
        KIND_CO => 6,
        KIND_GCN => 5,
        other => {
            return Err(AppError::format(
                path,
                format!("unknown model kind tag {other}"),
            ))
        }
    };
    if n_tensors != expected {
        return Err(AppError::format(
            path,
            format!("kind {kind} carries {n_tensors} tensors, expected {expected}"),
        ));
    }

    let mut offset = 8usize;
    let mut tensors = Vec::with_capacity(n_tensors);
    for i in 0..n_tensors {
        if bytes.len() < offset + 16 {
            return Err(AppError::format(
                path,
                format!("tensor {i}: truncated header"),
            ));
        }
        let rows = u64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap()) as usize;
        let cols = u64::from_le_bytes(bytes[offset + 8..offset + 16].try_into().unwrap()) as usize;
        offset += 16;
        let len = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| AppError::format(path, format!("tensor {i}: size overflow")))?;
        if bytes.len() < offset + len {
            return Err(AppError::format(
                path,
                format!("tensor {i}: truncated payload"),
            ));
        }
        let data: Vec<f64> = bytes[offset..offset + len]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        offset += len;
        tensors.push(Mat::from_vec(rows, cols, data));
    }
    if offset != bytes.len() {
        return Err(AppError::format(
            path,
            "trailing bytes after the last tensor",
        ));
    }

    let mut it = tensors.into_iter();
    let model = match kind {
        KIND_CO => TrainedModel::CoEmbedding(ModelParams {
            edge_layer: LayerWeights {
                w0: it.next().unwrap(),
                w1: it.next().unwrap(),
            },
            node_layer: LayerWeights {
                w0: it.next().unwrap(),
                w1: it.next().unwrap(),
            },
            classifier: it.next().unwrap(),
            bias: it.next().unwrap(),
        }),
        _ => TrainedModel::GcnBaseline(GcnParams {
            layer1: LayerWeights {
                w0: it.next().unwrap(),
                w1: it.next().unwrap(),
            },
            layer2: LayerWeights {
                w0: it.next().unwrap(),
                w1: it.next().unwrap(),
            },
            bias: it.next().unwrap(),
        }),
    };
    Ok(model)
}
