//! Labeled brain graphs and the pair incidence structure.
//!
//! A [`BrainGraph`] bundles the two connectivity views of one subject: the
//! node correlation matrix (also reused as node features), the edge cosine
//! similarity matrix, and a nonnegative adjacency obtained by zeroing the
//! correlation diagonal and taking absolute values.
//!
//! The [`IncidenceMatrix`] `B` links the two spaces: row `i`, column `e` is 1
//! exactly when region `i` belongs to pair `e`. Every region sits in
//! `N - 1` pairs, so `B B^T` has constant row sums of `2 (N - 1)` and
//! [`phi_project`] divides the congruence `B E B^T` by `(N - 1)^2` to map an
//! edge-by-edge matrix back to a node-by-node one without inflating its
//! scale.

use alloc::vec::Vec;

use crate::connectivity::{self, EfcMatrix, NfcMatrix};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::signal::{index_to_pair, n_edge_pairs, TimeSeriesMatrix};

/// Sparse node-to-edge incidence: entry `(i, e)` is 1 iff region `i` is an
/// endpoint of pair `e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    n_regions: usize,
    pairs: Vec<(usize, usize)>,
}

impl IncidenceMatrix {
    pub fn n_regions(&self) -> usize {
        self.n_regions
    }

    pub fn n_edges(&self) -> usize {
        self.pairs.len()
    }

    /// Endpoints of each edge in lexicographic order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of pairs each region belongs to.
    pub fn node_degree(&self) -> usize {
        self.n_regions - 1
    }

    /// The dense `N x N(N-1)/2` 0/1 matrix.
    pub fn to_dense(&self) -> Mat {
        let mut b = Mat::zeros(self.n_regions, self.pairs.len());
        for (e, &(i, j)) in self.pairs.iter().enumerate() {
            b[(i, e)] = 1.0;
            b[(j, e)] = 1.0;
        }
        b
    }

    /// `B^T h` for a node-space matrix `h` (`N x F`): each edge row is the
    /// sum of its two endpoint rows.
    pub fn gather_edges(&self, h: &Mat) -> Result<Mat> {
        if h.rows() != self.n_regions {
            return Err(Error::ShapeMismatch {
                op: "incidence gather",
                expected: (self.n_regions, h.cols()),
                got: h.dims(),
            });
        }
        let mut out = Mat::zeros(self.pairs.len(), h.cols());
        for (e, &(i, j)) in self.pairs.iter().enumerate() {
            let (ri, rj) = (h.row(i), h.row(j));
            for (dst, (a, b)) in out.row_mut(e).iter_mut().zip(ri.iter().zip(rj)) {
                *dst = a + b;
            }
        }
        Ok(out)
    }

    /// `B h` for an edge-space matrix `h` (`N_e x F`): each node row is the
    /// sum over the pairs containing that region.
    pub fn scatter_nodes(&self, h: &Mat) -> Result<Mat> {
        if h.rows() != self.pairs.len() {
            return Err(Error::ShapeMismatch {
                op: "incidence scatter",
                expected: (self.pairs.len(), h.cols()),
                got: h.dims(),
            });
        }
        let mut out = Mat::zeros(self.n_regions, h.cols());
        for (e, &(i, j)) in self.pairs.iter().enumerate() {
            let src = h.row(e);
            for (k, &v) in src.iter().enumerate() {
                out[(i, k)] += v;
                out[(j, k)] += v;
            }
        }
        Ok(out)
    }
}

/// Incidence structure for `n_regions` regions.
pub fn incidence_matrix(n_regions: usize) -> Result<IncidenceMatrix> {
    if n_regions < 2 {
        return Err(Error::InvalidDimensions {
            what: "incidence matrix",
            rows: n_regions,
            cols: n_edge_pairs(n_regions),
        });
    }
    let pairs = (0..n_edge_pairs(n_regions))
        .map(|e| index_to_pair(e, n_regions).expect("index within range"))
        .collect();
    Ok(IncidenceMatrix { n_regions, pairs })
}

/// Projects an edge-by-edge matrix to node space: `B E B^T / (N - 1)^2`.
///
/// The projection is linear, keeps symmetric inputs symmetric, and maps
/// matrices with entries in `[-1, 1]` to matrices with entries in `[-1, 1]`.
pub fn phi_project(efc: &EfcMatrix, incidence: &IncidenceMatrix) -> Result<Mat> {
    if efc.n_edges() != incidence.n_edges() {
        return Err(Error::ShapeMismatch {
            op: "edge-to-node projection",
            expected: (incidence.n_edges(), incidence.n_edges()),
            got: efc.values().dims(),
        });
    }
    // B E = scatter of E's rows; (B E) B^T = gather of columns, done as
    // scatter of the transpose to stay in row-major order.
    let be = incidence.scatter_nodes(efc.values())?;
    let bebt = incidence.scatter_nodes(&be.transpose())?;
    let scale = 1.0 / ((incidence.n_regions() - 1) as f64).powi(2);
    let mut out = bebt.transpose();
    out.scale(scale);
    Ok(out)
}

/// One subject: both connectivity views, the derived adjacency, and a class
/// label.
#[derive(Debug, Clone, PartialEq)]
pub struct BrainGraph {
    node_fc: NfcMatrix,
    edge_fc: EfcMatrix,
    adjacency: Mat,
    label: usize,
}

impl BrainGraph {
    /// Assembles a graph from parts, checking mutual consistency.
    pub fn from_parts(node_fc: NfcMatrix, edge_fc: EfcMatrix, label: usize) -> Result<Self> {
        let n = node_fc.n_regions();
        if edge_fc.n_edges() != n_edge_pairs(n) {
            return Err(Error::InvalidGraph {
                reason: "edge matrix side is not N(N-1)/2 for the node matrix",
            });
        }
        let adjacency = adjacency_from(&node_fc);
        Ok(BrainGraph {
            node_fc,
            edge_fc,
            adjacency,
            label,
        })
    }

    pub fn n_regions(&self) -> usize {
        self.node_fc.n_regions()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_fc.n_edges()
    }

    /// Region-by-region correlation matrix (also the raw node features).
    pub fn node_fc(&self) -> &NfcMatrix {
        &self.node_fc
    }

    /// Edge-by-edge cosine similarity matrix.
    pub fn edge_fc(&self) -> &EfcMatrix {
        &self.edge_fc
    }

    /// |correlation| with zeroed diagonal; nonnegative and symmetric.
    pub fn adjacency(&self) -> &Mat {
        &self.adjacency
    }

    pub fn label(&self) -> usize {
        self.label
    }
}

fn adjacency_from(node_fc: &NfcMatrix) -> Mat {
    let n = node_fc.n_regions();
    let mut w = Mat::from_fn(n, n, |i, j| node_fc.values()[(i, j)].abs());
    for i in 0..n {
        w[(i, i)] = 0.0;
    }
    w
}

/// Runs the full per-subject pipeline: z-score, edge expansion, both
/// connectivity matrices, adjacency, label.
pub fn build_graph(ts: &TimeSeriesMatrix, label: usize) -> Result<BrainGraph> {
    let node = connectivity::node_fc(ts)?;
    let z = crate::signal::zscore(ts)?;
    let ets = crate::signal::edge_time_series(&z);
    let edge = connectivity::edge_fc(&ets)?;
    BrainGraph::from_parts(node, edge, label)
}
