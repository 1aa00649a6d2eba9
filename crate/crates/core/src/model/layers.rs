//! The three graph-convolution layer primitives.
//!
//! All follow the same self-plus-aggregate shape `act(H W0 + M H W1)`; they
//! differ only in what does the aggregating: the adjacency, the projected
//! edge connectivity, or the incidence transpose.

use crate::error::{Error, Result};
use crate::graph::IncidenceMatrix;
use crate::matrix::{gemm, Mat};
use crate::model::LayerWeights;

/// Elementwise nonlinearity applied after a layer's affine part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
}

impl Activation {
    pub(crate) fn apply_in_place(self, m: &mut Mat) {
        if let Activation::Relu = self {
            for v in m.as_mut_slice() {
                *v = v.max(0.0);
            }
        }
    }
}

fn check_weights(w: &LayerWeights, f_in: usize, op: &'static str) -> Result<()> {
    if w.w0.dims() != w.w1.dims() {
        return Err(Error::ShapeMismatch {
            op,
            expected: w.w0.dims(),
            got: w.w1.dims(),
        });
    }
    if w.w0.rows() != f_in {
        return Err(Error::ShapeMismatch {
            op,
            expected: (f_in, w.w0.cols()),
            got: w.w0.dims(),
        });
    }
    Ok(())
}

fn propagate(h: &Mat, m: &Mat, w: &LayerWeights, act: Activation, op: &'static str) -> Result<Mat> {
    check_weights(w, h.cols(), op)?;
    if m.dims() != (h.rows(), h.rows()) {
        return Err(Error::ShapeMismatch {
            op,
            expected: (h.rows(), h.rows()),
            got: m.dims(),
        });
    }
    let mut out = h.matmul(&w.w0);
    let hw1 = h.matmul(&w.w1);
    gemm(&mut out, 1.0, 1.0, m, false, &hw1, false);
    act.apply_in_place(&mut out);
    Ok(out)
}

/// Plain graph convolution: `act(H W0 + A H W1)`.
pub fn gcn_layer(h: &Mat, a: &Mat, w: &LayerWeights, act: Activation) -> Result<Mat> {
    propagate(h, a, w, act, "gcn layer")
}

/// Node update aggregating through the projected edge connectivity:
/// `act(H W0 + P H W1)` where `P` is a [`phi_project`] output.
///
/// [`phi_project`]: crate::graph::phi_project
pub fn co_embed_node_layer(
    h: &Mat,
    efc_proj: &Mat,
    w: &LayerWeights,
    act: Activation,
) -> Result<Mat> {
    propagate(h, efc_proj, w, act, "co-embedding node layer")
}

/// Edge update aggregating endpoint node states:
/// `act(H_e W0 + B^T H_v W1)`.
pub fn edge_layer(
    h_e: &Mat,
    h_v: &Mat,
    b: &IncidenceMatrix,
    w: &LayerWeights,
    act: Activation,
) -> Result<Mat> {
    if h_e.rows() != b.n_edges() {
        return Err(Error::ShapeMismatch {
            op: "edge layer",
            expected: (b.n_edges(), h_e.cols()),
            got: h_e.dims(),
        });
    }
    if h_v.rows() != b.n_regions() {
        return Err(Error::ShapeMismatch {
            op: "edge layer",
            expected: (b.n_regions(), h_v.cols()),
            got: h_v.dims(),
        });
    }
    if w.w0.dims() != (h_e.cols(), w.w0.cols()) || w.w1.dims() != (h_v.cols(), w.w0.cols()) {
        return Err(Error::ShapeMismatch {
            op: "edge layer",
            expected: (h_e.cols(), w.w0.cols()),
            got: w.w0.dims(),
        });
    }
    let mut out = h_e.matmul(&w.w0);
    let hv = h_v.matmul(&w.w1);
    out.add_assign(&b.gather_edges(&hv)?);
    act.apply_in_place(&mut out);
    Ok(out)
}
