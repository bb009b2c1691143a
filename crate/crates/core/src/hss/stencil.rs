use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// A banded sparse matrix: main, sub- and super-diagonal plus a few extra
/// entries (for the ring matrices, the coupling that closes the loop).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseStencil {
    size: usize,
    main: Vec<f64>,
    /// `sub[i]` sits at `(i + 1, i)`.
    sub: Vec<f64>,
    /// `sup[i]` sits at `(i, i + 1)`.
    sup: Vec<f64>,
    extra: Vec<(usize, usize, f64)>,
}

impl SparseStencil {
    pub fn new(main: Vec<f64>, sub: Vec<f64>, sup: Vec<f64>, extra: Vec<(usize, usize, f64)>) -> Result<Self> {
        let size = main.len();
        let band = size.saturating_sub(1);
        if sub.len() != band || sup.len() != band {
            return Err(Error::shape("off-diagonal bands of length size - 1", alloc::format!("{} / {}", sub.len(), sup.len())));
        }
        if let Some(&(row, col, _)) = extra.iter().find(|(i, j, _)| *i >= size || *j >= size) {
            return Err(Error::IndexOutOfRange { row, col, size });
        }
        Ok(Self { size, main, sub, sup, extra })
    }

    pub fn zero(size: usize) -> Self {
        let band = size.saturating_sub(1);
        Self { size, main: alloc::vec![0.0; size], sub: alloc::vec![0.0; band], sup: alloc::vec![0.0; band], extra: Vec::new() }
    }

    /// Symmetric cyclic tridiagonal matrix: `off[i]` couples `i` and `i + 1`
    /// and `wrap` couples the last index back to the first.
    pub fn cyclic(main: Vec<f64>, off: Vec<f64>, wrap: f64) -> Result<Self> {
        let n = main.len();
        let extra = if n > 2 && wrap != 0.0 { alloc::vec![(0, n - 1, wrap), (n - 1, 0, wrap)] } else { Vec::new() };
        Self::new(main, off.clone(), off, extra)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn main(&self) -> &[f64] {
        &self.main
    }

    pub fn sub(&self) -> &[f64] {
        &self.sub
    }

    pub fn sup(&self) -> &[f64] {
        &self.sup
    }

    pub fn extra(&self) -> &[(usize, usize, f64)] {
        &self.extra
    }

    /// All stored entries as `(row, col, value)`, zeros included.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let main = self.main.iter().enumerate().map(|(i, &v)| (i, i, v));
        let sub = self.sub.iter().enumerate().map(|(i, &v)| (i + 1, i, v));
        let sup = self.sup.iter().enumerate().map(|(i, &v)| (i, i + 1, v));
        main.chain(sub).chain(sup).chain(self.extra.iter().copied())
    }

    /// Number of stored entries.
    pub fn stored(&self) -> usize {
        self.main.len() + self.sub.len() + self.sup.len() + self.extra.len()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.size, self.size);
        for (i, j, v) in self.entries() {
            d[(i, j)] += v;
        }
        d
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = alloc::vec![0.0; self.size];
        for (i, j, v) in self.entries() {
            y[i] += v * x[j];
        }
        y
    }
}
