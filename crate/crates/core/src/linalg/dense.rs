use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut, Range};

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Wraps row-major `data`, rejecting wrong lengths and non-finite entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape("rows * cols entries", data.len()));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / cols.max(1), col: pos % cols.max(1) });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for i in 0..rows {
                m.data[i * cols + j] = c[i];
            }
        }
        m
    }

    /// Diagonal matrix.
    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in d.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul: inner dimensions differ");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        gemm_acc(self.rows, self.cols, other.cols, 1.0, &self.data, &other.data, &mut out.data);
        out
    }

    /// `self^T * other`.
    pub fn tr_matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows, "tr_matmul: row counts differ");
        let (k, m, n) = (self.rows, self.cols, other.cols);
        let mut out = DenseMatrix::zeros(m, n);
        for p in 0..k {
            let a = self.row(p);
            let b = other.row(p);
            for (i, &aip) in a.iter().enumerate() {
                if aip == 0.0 {
                    continue;
                }
                let o = &mut out.data[i * n..(i + 1) * n];
                for (oj, bj) in o.iter_mut().zip(b) {
                    *oj += aip * bj;
                }
            }
        }
        out
    }

    /// `self * other^T`.
    pub fn matmul_tr(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.cols, "matmul_tr: column counts differ");
        let mut out = DenseMatrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                out.data[i * other.rows + j] = super::dot(a, other.row(j));
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec: length mismatch");
        (0..self.rows).map(|i| super::dot(self.row(i), x)).collect()
    }

    pub fn matvec_tr(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "matvec_tr: length mismatch");
        let mut y = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (yj, aij) in y.iter_mut().zip(self.row(i)) {
                *yj += xi * aij;
            }
        }
        y
    }

    pub fn add_assign(&mut self, other: &DenseMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add: shape mismatch");
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub: shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        DenseMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        let mut m = self.clone();
        m.scale(alpha);
        m
    }

    /// `diag(left) * self * diag(right)`.
    pub fn scale_rows_cols(&mut self, left: &[f64], right: &[f64]) {
        assert_eq!(left.len(), self.rows);
        assert_eq!(right.len(), self.cols);
        for i in 0..self.rows {
            let l = left[i];
            for (v, r) in self.row_mut(i).iter_mut().zip(right) {
                *v *= l * r;
            }
        }
    }

    /// Copy of the sub-block `rows x cols`.
    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> DenseMatrix {
        assert!(rows.end <= self.rows && cols.end <= self.cols, "submatrix out of range");
        let (r, c) = (rows.len(), cols.len());
        let mut data = Vec::with_capacity(r * c);
        for i in rows {
            data.extend_from_slice(&self.data[i * self.cols + cols.start..i * self.cols + cols.end]);
        }
        DenseMatrix { rows: r, cols: c, data }
    }

    /// Copy of the consecutive rows `rows`.
    pub fn row_block(&self, rows: Range<usize>) -> DenseMatrix {
        DenseMatrix {
            rows: rows.len(),
            cols: self.cols,
            data: self.data[rows.start * self.cols..rows.end * self.cols].to_vec(),
        }
    }

    /// Writes `block` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &DenseMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols, "set_block out of range");
        for i in 0..block.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(i));
        }
    }

    /// Horizontal concatenation `[a | b]`.
    pub fn hcat(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(a.rows, b.rows, "hcat: row counts differ");
        let cols = a.cols + b.cols;
        let mut data = Vec::with_capacity(a.rows * cols);
        for i in 0..a.rows {
            data.extend_from_slice(a.row(i));
            data.extend_from_slice(b.row(i));
        }
        DenseMatrix { rows: a.rows, cols, data }
    }

    /// Vertical concatenation.
    pub fn vcat(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(a.cols, b.cols, "vcat: column counts differ");
        let mut data = a.data.clone();
        data.extend_from_slice(&b.data);
        DenseMatrix { rows: a.rows + b.rows, cols: a.cols, data }
    }

    /// Largest absolute entry.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn norm_fro(&self) -> f64 {
        super::norm2(&self.data)
    }

    /// Spectral norm estimated by power iteration.
    pub fn norm2_est(&self, max_iter: usize) -> f64 {
        super::power_norm(self.rows, self.cols, |x| self.matvec(x), |y| self.matvec_tr(y), max_iter, 1e-10)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `c += alpha * a * b` for row-major `a` (m x k), `b` (k x n), `c` (m x n).
pub(crate) fn gemm_acc(m: usize, k: usize, n: usize, alpha: f64, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if n == 0 || k == 0 {
        return;
    }
    for i in 0..m {
        let ci = &mut c[i * n..(i + 1) * n];
        let ai = &a[i * k..(i + 1) * k];
        for (p, &aip) in ai.iter().enumerate() {
            if aip == 0.0 {
                continue;
            }
            let s = alpha * aip;
            let bp = &b[p * n..(p + 1) * n];
            for (cj, bj) in ci.iter_mut().zip(bp) {
                *cj += s * bj;
            }
        }
    }
}
