//! Dense row-major matrices over `f64`.
//!
//! The type is deliberately small: storage, indexing, and the handful of
//! whole-matrix operations the rest of the crate leans on. Matrix products
//! route through a tuned GEMM kernel; everything else is plain loops over
//! row slices.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

/// Dense row-major `f64` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Wraps an existing row-major buffer; `data.len()` must equal `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "buffer does not match {rows}x{cols}"
        );
        Mat { rows, cols, data }
    }

    /// Builds entry (r, c) as `f(r, c)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for r in 0..rows {
            let row = m.row_mut(r);
            for (c, v) in row.iter_mut().enumerate() {
                *v = f(r, c);
            }
        }
        m
    }

    /// Identity matrix of order `n`.
    pub fn eye(n: usize) -> Self {
        Mat::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// (rows, cols).
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row `r` as a contiguous slice.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// The whole buffer in row-major order.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows, rhs.cols);
        gemm(&mut out, 0.0, 1.0, self, false, rhs, false);
        out
    }

    /// `self^T * rhs`.
    pub fn t_matmul(&self, rhs: &Mat) -> Mat {
        let mut out = Mat::zeros(self.cols, rhs.cols);
        gemm(&mut out, 0.0, 1.0, self, true, rhs, false);
        out
    }

    /// `self * rhs^T`.
    pub fn matmul_t(&self, rhs: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows, rhs.rows);
        gemm(&mut out, 0.0, 1.0, self, false, rhs, true);
        out
    }

    /// Out-of-place transpose.
    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for (c, &v) in self.row(r).iter().enumerate() {
                out.data[c * self.rows + r] = v;
            }
        }
        out
    }

    /// Multiplies every entry by `s`.
    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Entrywise `self += other`; matrices must share a shape.
    pub fn add_assign(&mut self, other: &Mat) {
        assert_eq!(self.dims(), other.dims(), "shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Largest entrywise absolute difference; matrices must share a shape.
    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!(self.dims(), other.dims(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest |m[i][j] - m[j][i]| over a square matrix.
    pub fn max_asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "not square");
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Mean of each column (length `cols`).
    pub fn col_means(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (acc, &v) in out.iter_mut().zip(self.row(r)) {
                *acc += v;
            }
        }
        let inv = 1.0 / self.rows as f64;
        for v in &mut out {
            *v *= inv;
        }
        out
    }

    /// Mean of each row (length `rows`).
    pub fn row_means(&self) -> Vec<f64> {
        let inv = 1.0 / self.cols as f64;
        (0..self.rows)
            .map(|r| self.row(r).iter().sum::<f64>() * inv)
            .collect()
    }

    /// True when every entry is finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// `out = beta * out + alpha * op(a) * op(b)` where `op` is an optional
/// transpose. Shapes are checked against `out`.
pub(crate) fn gemm(out: &mut Mat, beta: f64, alpha: f64, a: &Mat, ta: bool, b: &Mat, tb: bool) {
    let (am, ak) = if ta {
        (a.cols, a.rows)
    } else {
        (a.rows, a.cols)
    };
    let (bk, bn) = if tb {
        (b.cols, b.rows)
    } else {
        (b.rows, b.cols)
    };
    assert_eq!(ak, bk, "inner dimensions disagree");
    assert_eq!((out.rows, out.cols), (am, bn), "output shape disagrees");

    if am == 0 || bn == 0 {
        return;
    }
    if ak == 0 {
        out.scale(beta);
        return;
    }

    let (rsa, csa) = if ta {
        (1_isize, a.cols as isize)
    } else {
        (a.cols as isize, 1_isize)
    };
    let (rsb, csb) = if tb {
        (1_isize, b.cols as isize)
    } else {
        (b.cols as isize, 1_isize)
    };
    let rsc = out.cols as isize;

    // Safety: strides describe in-bounds row-major (or transposed) layouts of
    // the three distinct buffers, and the borrow checker rules out aliasing.
    unsafe {
        matrixmultiply::dgemm(
            am,
            ak,
            bn,
            alpha,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            beta,
            out.data.as_mut_ptr(),
            rsc,
            1,
        );
    }
}

/// GEMM over raw slices: `c[m x n] = beta * c + alpha * a[m x k] * b[k x n]`,
/// all row-major with explicit row strides (`csa = csb = csc = 1`). Lets the
/// trainer run products on sub-blocks of larger stacked buffers.
pub(crate) fn gemm_raw(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    rsa: usize,
    ta: bool,
    b: &[f64],
    rsb: usize,
    tb: bool,
    beta: f64,
    c: &mut [f64],
    rsc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(
        rsc >= n && c.len() >= (m - 1) * rsc + n,
        "output block out of bounds"
    );
    let (a_rows, a_cols) = if ta { (k, m) } else { (m, k) };
    let (b_rows, b_cols) = if tb { (n, k) } else { (k, n) };
    assert!(
        rsa >= a_cols && a.len() >= (a_rows - 1) * rsa + a_cols,
        "a block out of bounds"
    );
    assert!(
        rsb >= b_cols && b.len() >= (b_rows - 1) * rsb + b_cols,
        "b block out of bounds"
    );
    if k == 0 {
        for r in 0..m {
            for v in &mut c[r * rsc..r * rsc + n] {
                *v *= beta;
            }
        }
        return;
    }
    let (rsa, csa) = if ta {
        (1, rsa as isize)
    } else {
        (rsa as isize, 1)
    };
    let (rsb, csb) = if tb {
        (1, rsb as isize)
    } else {
        (rsb as isize, 1)
    };
    // Safety: the asserts above bound every strided access; the slices are
    // distinct borrows so no aliasing is possible.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            1,
        );
    }
}
