//! Node-level and edge-level connectivity matrices.
//!
//! [`node_fc`] is the familiar region-by-region Pearson correlation matrix.
//! [`edge_fc`] is its edge-centric analogue: the cosine similarity between
//! every pair of edge time series, i.e. the normalized Gram matrix of the
//! edge series columns. Both are symmetric with unit diagonal and entries in
//! `[-1, 1]`; the edge matrix is additionally positive semidefinite because
//! it is a normalized Gram matrix.
//!
//! [`edge_fc`] materializes the edge series once in transposed layout and
//! walks every column pair directly; it is the reference route. For large
//! pair counts the quadratic walk is dominated by memory traffic, so
//! [`edge_fc_blocked`] computes the same matrix tile by tile with a packed
//! GEMM kernel under an explicit byte budget. The two routes share no code
//! beyond the input type, so either can check the other.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::signal::{self, EdgeTimeSeries, TimeSeriesMatrix, EPS_STD};

/// Region-by-region Pearson correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NfcMatrix {
    values: Mat,
}

/// Edge-by-edge cosine similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EfcMatrix {
    values: Mat,
}

fn validate_similarity(values: &Mat, what: &'static str) -> Result<()> {
    if values.rows() != values.cols() || values.rows() == 0 {
        return Err(Error::InvalidDimensions {
            what,
            rows: values.rows(),
            cols: values.cols(),
        });
    }
    if !values.all_finite() {
        return Err(Error::NonFiniteInput { what });
    }
    if values.max_asymmetry() > 1e-12 {
        return Err(Error::InvalidGraph {
            reason: "similarity matrix is not symmetric",
        });
    }
    for i in 0..values.rows() {
        if (values[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidGraph {
                reason: "similarity matrix diagonal is not 1",
            });
        }
    }
    if values.as_slice().iter().any(|v| v.abs() > 1.0 + 1e-12) {
        return Err(Error::InvalidGraph {
            reason: "similarity entry outside [-1, 1]",
        });
    }
    Ok(())
}

impl NfcMatrix {
    /// Wraps a matrix after checking symmetry, unit diagonal, and range.
    pub fn from_values(values: Mat) -> Result<Self> {
        validate_similarity(&values, "node connectivity matrix")?;
        Ok(NfcMatrix { values })
    }

    /// Number of regions.
    pub fn n_regions(&self) -> usize {
        self.values.rows()
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }
}

impl EfcMatrix {
    /// Wraps a matrix after checking symmetry, unit diagonal, and range.
    pub fn from_values(values: Mat) -> Result<Self> {
        validate_similarity(&values, "edge connectivity matrix")?;
        Ok(EfcMatrix { values })
    }

    /// Number of edges (matrix side length).
    pub fn n_edges(&self) -> usize {
        self.values.rows()
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }
}

/// Pearson correlation matrix of the regions in `ts`.
///
/// Computed as the time-mean of products of z-scored signals, which keeps it
/// bit-for-bit aligned with the time-means of the corresponding edge series.
pub fn node_fc(ts: &TimeSeriesMatrix) -> Result<NfcMatrix> {
    let z = signal::zscore(ts)?;
    let zt = z.values().transpose();
    let n = zt.rows();
    let inv_t = 1.0 / z.t_len() as f64;

    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        let zi = zt.row(i);
        for j in i..n {
            let r: f64 = zi.iter().zip(zt.row(j)).map(|(a, b)| a * b).sum::<f64>() * inv_t;
            out[(i, j)] = r;
            out[(j, i)] = r;
        }
    }
    Ok(NfcMatrix { values: out })
}

fn edge_norms(ets: &EdgeTimeSeries) -> Result<Vec<f64>> {
    let m = ets.values();
    let mut sq = vec![0.0_f64; m.cols()];
    for r in 0..m.rows() {
        for (acc, &v) in sq.iter_mut().zip(m.row(r)) {
            *acc += v * v;
        }
    }
    for (e, s) in sq.iter_mut().enumerate() {
        let norm = s.sqrt();
        if norm <= EPS_STD {
            return Err(Error::DegenerateEdge { edge: e });
        }
        *s = norm;
    }
    Ok(sq)
}

/// Cosine similarity between every pair of edge time series columns.
///
/// Direct route: one dot product per entry of the upper triangle, mirrored.
pub fn edge_fc(ets: &EdgeTimeSeries) -> Result<EfcMatrix> {
    let norms = edge_norms(ets)?;
    let et = ets.values().transpose();
    let n_e = et.rows();

    let mut out = Mat::zeros(n_e, n_e);
    for m in 0..n_e {
        let row_m = et.row(m);
        for n in m..n_e {
            let g: f64 = row_m.iter().zip(et.row(n)).map(|(a, b)| a * b).sum();
            let v = g / (norms[m] * norms[n]);
            out[(m, n)] = v;
            out[(n, m)] = v;
        }
    }
    Ok(EfcMatrix { values: out })
}

/// Same matrix as [`edge_fc`], computed tile by tile with a packed GEMM
/// kernel.
///
/// `block_size` bounds the tile side. The working set is the full output
/// matrix, two packed `block x T` column panels, and the norm vector; if that
/// exceeds `memory_budget` bytes the call fails up front with
/// [`Error::BudgetTooSmall`] rather than allocating.
pub fn edge_fc_blocked(
    ets: &EdgeTimeSeries,
    block_size: usize,
    memory_budget: u64,
) -> Result<EfcMatrix> {
    if block_size == 0 {
        return Err(Error::InvalidBlockSize);
    }
    let m = ets.values();
    let (t_len, n_e) = m.dims();
    let block = block_size.min(n_e);

    let bytes = |elems: usize| 8 * elems as u64;
    let required = bytes(n_e * n_e) + 2 * bytes(block * t_len) + bytes(n_e);
    if required > memory_budget {
        return Err(Error::BudgetTooSmall {
            required,
            budget: memory_budget,
        });
    }

    let norms = edge_norms(ets)?;
    let mut out = Mat::zeros(n_e, n_e);
    let mut pack_a = vec![0.0_f64; block * t_len];
    let mut pack_b = vec![0.0_f64; block * t_len];

    // Copies columns a0..a0+w into a w x T row-major panel.
    let pack = |buf: &mut [f64], a0: usize, w: usize| {
        for t in 0..t_len {
            let src = &m.row(t)[a0..a0 + w];
            for (r, &v) in src.iter().enumerate() {
                buf[r * t_len + t] = v;
            }
        }
    };

    let mut ai = 0;
    while ai < n_e {
        let wi = block.min(n_e - ai);
        pack(&mut pack_a, ai, wi);
        let mut aj = ai;
        while aj < n_e {
            let wj = block.min(n_e - aj);
            let b_panel: &[f64] = if aj == ai {
                &pack_a
            } else {
                pack(&mut pack_b, aj, wj);
                &pack_b
            };
            // Safety: the panels are wi x T and wj x T row-major buffers, and
            // the output pointer addresses the in-bounds wi x wj tile at
            // (ai, aj) of an n_e x n_e row-major matrix.
            unsafe {
                matrixmultiply::dgemm(
                    wi,
                    t_len,
                    wj,
                    1.0,
                    pack_a.as_ptr(),
                    t_len as isize,
                    1,
                    b_panel.as_ptr(),
                    1,
                    t_len as isize,
                    0.0,
                    out.as_mut_slice().as_mut_ptr().add(ai * n_e + aj),
                    n_e as isize,
                    1,
                );
            }
            aj += wj;
        }
        ai += wi;
    }

    for i in 0..n_e {
        for j in i..n_e {
            let v = out[(i, j)] / (norms[i] * norms[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(EfcMatrix { values: out })
}
