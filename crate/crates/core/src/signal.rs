//! Z-scoring and edge time series.
//!
//! A recording is a `T x N` matrix: `T` samples of `N` regional signals.
//! Z-scoring standardizes each region with the population standard deviation
//! (divisor `T`, not `T - 1`). The edge expansion then produces one series
//! per unordered region pair: at each time step, the product of the two
//! regions' z-scores. A positive entry means the pair co-deviates from
//! baseline in the same direction at that instant, a negative entry means
//! they deviate in opposite directions, and the time-mean of a pair's series
//! recovers exactly the Pearson correlation of the two regions.
//!
//! Pairs `(i, j)` with `i < j` are ordered lexicographically, giving
//! `N (N - 1) / 2` edge columns. [`pair_to_index`] and [`index_to_pair`]
//! convert between the two namings and are inverses of each other.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Spread threshold below which a series counts as constant.
pub const EPS_STD: f64 = 1e-12;

/// Number of unordered region pairs for `n` regions.
pub const fn n_edge_pairs(n: usize) -> usize {
    n * (n - 1) / 2
}

/// A validated `T x N` recording: every entry finite, `T >= 2`, `N >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    values: Mat,
}

impl TimeSeriesMatrix {
    /// Validates and wraps a `T x N` matrix (rows are time samples).
    pub fn new(values: Mat) -> Result<Self> {
        let (t_len, n_regions) = values.dims();
        if t_len < 2 || n_regions < 2 {
            return Err(Error::InvalidDimensions {
                what: "time series matrix",
                rows: t_len,
                cols: n_regions,
            });
        }
        if !values.all_finite() {
            return Err(Error::NonFiniteInput {
                what: "time series matrix",
            });
        }
        Ok(TimeSeriesMatrix { values })
    }

    /// Number of time samples `T`.
    pub fn t_len(&self) -> usize {
        self.values.rows()
    }

    /// Number of regions `N`.
    pub fn n_regions(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }
}

/// A recording whose columns each have mean 0 and population spread 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ZScoredMatrix {
    values: Mat,
}

impl ZScoredMatrix {
    /// Wraps a matrix that is already standardized, verifying each column's
    /// mean and population spread to within `1e-10`.
    pub fn from_values(values: Mat) -> Result<Self> {
        let ts = TimeSeriesMatrix::new(values)?;
        let t = ts.t_len() as f64;
        for c in 0..ts.n_regions() {
            let mut sum = 0.0;
            let mut sq = 0.0;
            for r in 0..ts.t_len() {
                let v = ts.values[(r, c)];
                sum += v;
                sq += v * v;
            }
            let mean = sum / t;
            let var = (sq / t - mean * mean).max(0.0);
            if mean.abs() > 1e-10 || (var.sqrt() - 1.0).abs() > 1e-10 {
                return Err(Error::NotStandardized { region: c });
            }
        }
        Ok(ZScoredMatrix { values: ts.values })
    }

    pub fn t_len(&self) -> usize {
        self.values.rows()
    }

    pub fn n_regions(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }
}

/// Edge time series: `T x N(N-1)/2`, one column per unordered region pair in
/// lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTimeSeries {
    values: Mat,
    n_regions: usize,
}

impl EdgeTimeSeries {
    /// Wraps a `T x N(N-1)/2` matrix of edge products for `n_regions` regions.
    pub fn from_values(values: Mat, n_regions: usize) -> Result<Self> {
        if values.rows() < 2 || values.cols() != n_edge_pairs(n_regions) {
            return Err(Error::InvalidDimensions {
                what: "edge time series matrix",
                rows: values.rows(),
                cols: values.cols(),
            });
        }
        if !values.all_finite() {
            return Err(Error::NonFiniteInput {
                what: "edge time series matrix",
            });
        }
        Ok(EdgeTimeSeries { values, n_regions })
    }

    pub fn t_len(&self) -> usize {
        self.values.rows()
    }

    /// Number of regions the series was expanded from.
    pub fn n_regions(&self) -> usize {
        self.n_regions
    }

    /// Number of edge columns.
    pub fn n_edges(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }
}

/// Standardizes each region to mean 0 and population spread 1.
///
/// Fails with [`Error::DegenerateSeries`] naming the first region whose
/// spread is at most [`EPS_STD`].
pub fn zscore(ts: &TimeSeriesMatrix) -> Result<ZScoredMatrix> {
    let (t_len, n_regions) = ts.values.dims();
    let t = t_len as f64;
    let mut out = Mat::zeros(t_len, n_regions);

    for c in 0..n_regions {
        let mut sum = 0.0;
        for r in 0..t_len {
            sum += ts.values[(r, c)];
        }
        let mean = sum / t;
        let mut sq = 0.0;
        for r in 0..t_len {
            let d = ts.values[(r, c)] - mean;
            sq += d * d;
        }
        let sd = (sq / t).sqrt();
        if sd <= EPS_STD {
            return Err(Error::DegenerateSeries { region: c });
        }
        let inv = 1.0 / sd;
        for r in 0..t_len {
            out[(r, c)] = (ts.values[(r, c)] - mean) * inv;
        }
    }
    Ok(ZScoredMatrix { values: out })
}

/// Lexicographic edge index of the pair `(i, j)`; requires `i < j < n_regions`.
pub fn pair_to_index(i: usize, j: usize, n_regions: usize) -> Result<usize> {
    if i >= j || j >= n_regions {
        return Err(Error::InvalidPair { i, j, n_regions });
    }
    Ok(i * n_regions - i * (i + 1) / 2 + (j - i - 1))
}

/// The pair `(i, j)` at lexicographic edge index `edge`.
pub fn index_to_pair(edge: usize, n_regions: usize) -> Result<(usize, usize)> {
    let n_edges = n_edge_pairs(n_regions);
    if edge >= n_edges {
        return Err(Error::InvalidEdgeIndex { edge, n_edges });
    }
    let mut rest = edge;
    for i in 0..n_regions {
        let row_len = n_regions - 1 - i;
        if rest < row_len {
            return Ok((i, i + 1 + rest));
        }
        rest -= row_len;
    }
    unreachable!("edge index validated above")
}

/// Expands z-scored signals into edge time series: column `(i, j)` holds the
/// elementwise product of regions `i` and `j`.
pub fn edge_time_series(z: &ZScoredMatrix) -> EdgeTimeSeries {
    let (t_len, n) = z.values.dims();
    let n_edges = n_edge_pairs(n);
    let mut out = Mat::zeros(t_len, n_edges);
    for r in 0..t_len {
        let src = z.values.row(r);
        let dst = out.row_mut(r);
        let mut e = 0;
        for i in 0..n {
            let zi = src[i];
            for &zj in &src[i + 1..] {
                dst[e] = zi * zj;
                e += 1;
            }
        }
    }
    EdgeTimeSeries {
        values: out,
        n_regions: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    // Scalar re-derivation of the z-score, kept free of the crate's matrix
    // code so the two routes stay independent.
    fn zscore_column_oracle(col: &[f64]) -> Vec<f64> {
        let t = col.len() as f64;
        let mean: f64 = col.iter().sum::<f64>() / t;
        let var: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t;
        let sd = var.sqrt();
        col.iter().map(|v| (v - mean) / sd).collect()
    }

    fn ts_from_cols(cols: &[Vec<f64>]) -> TimeSeriesMatrix {
        let t = cols[0].len();
        TimeSeriesMatrix::new(Mat::from_fn(t, cols.len(), |r, c| cols[c][r])).unwrap()
    }

    #[test]
    fn zscore_known_column() {
        let ts = ts_from_cols(&[vec![1.0, 2.0, 3.0], vec![4.0, 0.0, 1.0]]);
        let z = zscore(&ts).unwrap();
        let want = [-1.224745, 0.0, 1.224745];
        for (r, w) in want.iter().enumerate() {
            assert!((z.values()[(r, 0)] - w).abs() < 1e-6);
        }
    }

    #[test]
    fn zscore_matches_scalar_oracle() {
        let cols = vec![
            vec![0.3, -1.2, 4.5, 2.2, -0.7, 0.0, 1.9],
            vec![10.0, 10.5, 9.75, 11.25, 10.1, 9.4, 10.6],
        ];
        let z = zscore(&ts_from_cols(&cols)).unwrap();
        for (c, col) in cols.iter().enumerate() {
            let want = zscore_column_oracle(col);
            for (r, w) in want.iter().enumerate() {
                assert!((z.values()[(r, c)] - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zscore_rejects_constant_region() {
        let ts = ts_from_cols(&[vec![1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0]]);
        assert_eq!(zscore(&ts), Err(Error::DegenerateSeries { region: 1 }));
    }

    #[test]
    fn zscore_fixes_standardized_input() {
        let ts = ts_from_cols(&[vec![1.0, -1.0, 1.0, -1.0], vec![-1.0, 1.0, 1.0, -1.0]]);
        let z = zscore(&ts).unwrap();
        assert!(z.values().max_abs_diff(ts.values()) < 1e-12);
        assert!(ZScoredMatrix::from_values(ts.values().clone()).is_ok());
    }

    #[test]
    fn rejects_too_small_and_non_finite() {
        assert!(TimeSeriesMatrix::new(Mat::zeros(1, 4)).is_err());
        assert!(TimeSeriesMatrix::new(Mat::zeros(4, 1)).is_err());
        let mut m = Mat::zeros(3, 2);
        m[(1, 1)] = f64::NAN;
        assert!(TimeSeriesMatrix::new(m).is_err());
    }

    #[test]
    fn pair_index_examples() {
        assert_eq!(pair_to_index(0, 1, 4).unwrap(), 0);
        assert_eq!(pair_to_index(1, 3, 4).unwrap(), 4);
        assert_eq!(pair_to_index(2, 3, 4).unwrap(), 5);
        assert_eq!(index_to_pair(0, 4).unwrap(), (0, 1));
        assert_eq!(index_to_pair(5, 4).unwrap(), (2, 3));
    }

    #[test]
    fn pair_index_matches_enumeration_and_roundtrips() {
        for n in 2..=20 {
            let mut e = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    assert_eq!(pair_to_index(i, j, n).unwrap(), e);
                    assert_eq!(index_to_pair(e, n).unwrap(), (i, j));
                    e += 1;
                }
            }
            assert_eq!(e, n_edge_pairs(n));
            assert!(index_to_pair(e, n).is_err());
        }
    }

    #[test]
    fn pair_index_rejects_bad_pairs() {
        assert!(pair_to_index(2, 2, 4).is_err());
        assert!(pair_to_index(3, 1, 4).is_err());
        assert!(pair_to_index(0, 4, 4).is_err());
    }

    #[test]
    fn edge_series_sign_rule() {
        // Two regions moving together produce a positive product series;
        // opposed regions a negative one.
        let same =
            ZScoredMatrix::from_values(Mat::from_vec(2, 2, vec![1.0, 1.0, -1.0, -1.0])).unwrap();
        let e = edge_time_series(&same);
        assert_eq!(e.values().as_slice(), &[1.0, 1.0]);

        let opposed =
            ZScoredMatrix::from_values(Mat::from_vec(2, 2, vec![1.0, -1.0, -1.0, 1.0])).unwrap();
        let e = edge_time_series(&opposed);
        assert_eq!(e.values().as_slice(), &[-1.0, -1.0]);
    }

    #[test]
    fn edge_series_matches_product_oracle() {
        let cols = vec![
            vec![0.5, -1.5, 1.0, 0.25, -0.25],
            vec![2.0, -0.5, -1.0, 0.75, -1.25],
            vec![-1.0, 0.25, 0.5, -2.0, 2.25],
        ];
        let z = zscore(&ts_from_cols(&cols)).unwrap();
        let e = edge_time_series(&z);
        assert_eq!(e.n_edges(), 3);
        for t in 0..z.t_len() {
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let idx = pair_to_index(i, j, 3).unwrap();
                    let want = z.values()[(t, i)] * z.values()[(t, j)];
                    assert!((e.values()[(t, idx)] - want).abs() < 1e-15);
                }
            }
        }
    }
}
