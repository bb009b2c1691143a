use super::{pivoted_qr, svd, thin_qr, DenseMatrix};
use crate::error::{Error, Result};

/// Accuracy target for low-rank truncation, measured in the spectral norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    /// Discard everything below `eps` in absolute terms.
    Absolute(f64),
    /// Discard everything below `eps` times the largest singular value of the
    /// block being compressed.
    Relative(f64),
}

impl Tolerance {
    pub fn eps(&self) -> f64 {
        match *self {
            Tolerance::Absolute(e) | Tolerance::Relative(e) => e,
        }
    }

    /// Absolute truncation threshold for a block whose largest singular
    /// value is `sigma_max`.
    pub fn threshold(&self, sigma_max: f64) -> f64 {
        match *self {
            Tolerance::Absolute(e) => e,
            Tolerance::Relative(e) => e * sigma_max,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::Absolute(1e-7)
    }
}

/// How [`truncated_factor_with`] reveals the rank.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FactorMethod {
    /// Column-pivoted QR followed by an SVD of the (small) triangular factor.
    #[default]
    PivotedQr,
    /// Full SVD of the block. Slower; used as a reference.
    Svd,
}

/// The `m x n` matrix `left * right^T`, with inner dimension `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankFactor {
    left: DenseMatrix,
    right: DenseMatrix,
}

impl LowRankFactor {
    pub fn new(left: DenseMatrix, right: DenseMatrix) -> Result<Self> {
        if left.cols() != right.cols() {
            return Err(Error::shape(
                "left and right factors with equal column counts",
                alloc::format!("{} vs {}", left.cols(), right.cols()),
            ));
        }
        Ok(Self { left, right })
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self { left: DenseMatrix::zeros(rows, 0), right: DenseMatrix::zeros(cols, 0) }
    }

    pub fn rows(&self) -> usize {
        self.left.rows()
    }

    pub fn cols(&self) -> usize {
        self.right.rows()
    }

    pub fn rank(&self) -> usize {
        self.left.cols()
    }

    pub fn left(&self) -> &DenseMatrix {
        &self.left
    }

    pub fn right(&self) -> &DenseMatrix {
        &self.right
    }

    pub fn into_parts(self) -> (DenseMatrix, DenseMatrix) {
        (self.left, self.right)
    }

    /// Number of stored floats.
    pub fn storage(&self) -> usize {
        (self.rows() + self.cols()) * self.rank()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.left.matmul_tr(&self.right)
    }

    pub fn transpose(&self) -> LowRankFactor {
        LowRankFactor { left: self.right.clone(), right: self.left.clone() }
    }

    pub fn negated(&self) -> LowRankFactor {
        LowRankFactor { left: self.left.scaled(-1.0), right: self.right.clone() }
    }

    /// `y += self * x` for a row-major block `x` (cols x r) into `y` (rows x r).
    pub(crate) fn apply_acc(&self, x: &[f64], r: usize, y: &mut [f64]) {
        outer_apply_acc(&self.left, &self.right, x, r, y)
    }

    /// `y += self^T * x`.
    pub(crate) fn apply_tr_acc(&self, x: &[f64], r: usize, y: &mut [f64]) {
        outer_apply_acc(&self.right, &self.left, x, r, y)
    }

    pub fn matvec(&self, x: &[f64]) -> alloc::vec::Vec<f64> {
        assert_eq!(x.len(), self.cols());
        let mut y = alloc::vec![0.0; self.rows()];
        self.apply_acc(x, 1, &mut y);
        y
    }

    /// Restriction to the given row and column ranges.
    pub fn slice(&self, rows: core::ops::Range<usize>, cols: core::ops::Range<usize>) -> LowRankFactor {
        LowRankFactor { left: self.left.row_block(rows), right: self.right.row_block(cols) }
    }

    /// `diag(d_left) * self * diag(d_right)`; exact.
    pub fn scale(&self, d_left: &[f64], d_right: &[f64]) -> LowRankFactor {
        let mut left = self.left.clone();
        let mut right = self.right.clone();
        let k = self.rank();
        let ones = alloc::vec![1.0; k];
        left.scale_rows_cols(d_left, &ones);
        right.scale_rows_cols(d_right, &ones);
        LowRankFactor { left, right }
    }

    /// Stacks `[self | other]` without recompressing.
    pub(crate) fn concat(&self, other: &LowRankFactor) -> LowRankFactor {
        LowRankFactor {
            left: DenseMatrix::hcat(&self.left, &other.left),
            right: DenseMatrix::hcat(&self.right, &other.right),
        }
    }

    /// Embeds into a larger `rows x cols` zero matrix at the given offsets.
    pub(crate) fn padded(&self, rows: usize, cols: usize, row0: usize, col0: usize) -> LowRankFactor {
        let k = self.rank();
        let mut left = DenseMatrix::zeros(rows, k);
        left.set_block(row0, 0, &self.left);
        let mut right = DenseMatrix::zeros(cols, k);
        right.set_block(col0, 0, &self.right);
        LowRankFactor { left, right }
    }
}

/// `y += left * (right^T * x)`.
fn outer_apply_acc(left: &DenseMatrix, right: &DenseMatrix, x: &[f64], r: usize, y: &mut [f64]) {
    let k = left.cols();
    if k == 0 || r == 0 {
        return;
    }
    let mut t = alloc::vec![0.0; k * r];
    for i in 0..right.rows() {
        let xi = &x[i * r..(i + 1) * r];
        for (p, &v) in right.row(i).iter().enumerate() {
            if v != 0.0 {
                for (tp, xv) in t[p * r..(p + 1) * r].iter_mut().zip(xi) {
                    *tp += v * xv;
                }
            }
        }
    }
    super::dense::gemm_acc(left.rows(), k, r, 1.0, left.as_slice(), &t, y);
}

/// Factors `m` as `U V^T` with the smallest rank meeting `tol` in the
/// spectral norm. Uses the default [`FactorMethod`].
pub fn truncated_factor(m: &DenseMatrix, tol: Tolerance) -> LowRankFactor {
    truncated_factor_with(m, tol, FactorMethod::PivotedQr)
}

pub fn truncated_factor_with(m: &DenseMatrix, tol: Tolerance, method: FactorMethod) -> LowRankFactor {
    let (rows, cols) = (m.rows(), m.cols());
    if rows == 0 || cols == 0 || m.norm_max() == 0.0 {
        return LowRankFactor::zero(rows, cols);
    }
    match method {
        FactorMethod::Svd => {
            let f = svd(m);
            let keep = count_above(&f.s, tol.threshold(f.s[0]));
            from_svd_parts(&f.u, &f.s, &f.v, keep)
        }
        FactorMethod::PivotedQr => {
            // The QR stage must leave room for the SVD stage: stop once the
            // trailing block is a tenth of the final threshold.
            let qr_stop = match tol {
                Tolerance::Absolute(e) => 0.1 * e,
                Tolerance::Relative(e) => 0.1 * e * m.norm_fro() / libm::sqrt(rows.min(cols) as f64),
            };
            let qr = pivoted_qr(m, qr_stop);
            if qr.rank() == 0 {
                return LowRankFactor::zero(rows, cols);
            }
            // m ≈ Q R with R (k x cols); SVD of R^T keeps the tall side contiguous.
            let f = svd(&qr.r.transpose());
            let theta = (tol.threshold(f.s[0]) - qr.residual).max(0.0);
            let keep = count_above(&f.s, theta);
            // R = V_f S U_f^T  =>  m ≈ (Q V_f S) U_f^T
            let left_basis = qr.q.matmul(&f.v);
            from_svd_parts(&left_basis, &f.s, &f.u, keep)
        }
    }
}

fn count_above(s: &[f64], threshold: f64) -> usize {
    s.iter().take_while(|&&x| x > threshold).count()
}

fn from_svd_parts(u: &DenseMatrix, s: &[f64], v: &DenseMatrix, keep: usize) -> LowRankFactor {
    let mut left = u.submatrix(0..u.rows(), 0..keep);
    left.scale_rows_cols(&alloc::vec![1.0; u.rows()], &s[..keep]);
    LowRankFactor { left, right: v.submatrix(0..v.rows(), 0..keep) }
}

/// Re-expresses `a` with the smallest rank meeting `tol`. The spectral-norm
/// change is at most the tolerance threshold.
pub fn lr_recompress(a: &LowRankFactor, tol: Tolerance) -> LowRankFactor {
    let k = a.rank();
    if k == 0 {
        return a.clone();
    }
    let (qu, ru) = thin_qr(&a.left);
    let (qv, rv) = thin_qr(&a.right);
    let core = ru.matmul_tr(&rv);
    let f = svd(&core);
    let keep = if f.s[0] == 0.0 { 0 } else { count_above(&f.s, tol.threshold(f.s[0])) };
    if keep == 0 {
        return LowRankFactor::zero(a.rows(), a.cols());
    }
    let mut left = qu.matmul(&f.u.submatrix(0..f.u.rows(), 0..keep));
    left.scale_rows_cols(&alloc::vec![1.0; left.rows()], &f.s[..keep]);
    let right = qv.matmul(&f.v.submatrix(0..f.v.rows(), 0..keep));
    LowRankFactor { left, right }
}

/// `a + b`, recompressed to `tol`.
pub fn lr_add(a: &LowRankFactor, b: &LowRankFactor, tol: Tolerance) -> Result<LowRankFactor> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::shape(
            "conformable low-rank factors",
            alloc::format!("{}x{} vs {}x{}", a.rows(), a.cols(), b.rows(), b.cols()),
        ));
    }
    Ok(lr_recompress(&a.concat(b), tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn zero_matrix_rank_zero() {
        let f = truncated_factor(&DenseMatrix::zeros(6, 4), Tolerance::Absolute(1e-3));
        assert_eq!((f.rank(), f.rows(), f.cols()), (0, 6, 4));
        assert_eq!(f.to_dense(), DenseMatrix::zeros(6, 4));
    }

    #[test]
    fn unit_outer_product_is_rank_one() {
        let u: alloc::vec::Vec<f64> = vec![0.6, 0.0, -0.8];
        let v: alloc::vec::Vec<f64> = vec![0.0, 1.0, 0.0, 0.0];
        let m = DenseMatrix::from_fn(3, 4, |i, j| u[i] * v[j]);
        for method in [FactorMethod::PivotedQr, FactorMethod::Svd] {
            let f = truncated_factor_with(&m, Tolerance::Absolute(1e-7), method);
            assert_eq!(f.rank(), 1);
            assert!(f.to_dense().sub(&m).norm_max() < 1e-15);
        }
    }

    #[test]
    fn duplicated_factor_recompresses_to_rank_one() {
        let u = DenseMatrix::from_fn(5, 1, |i, _| i as f64 + 1.0);
        let v = DenseMatrix::from_fn(4, 1, |i, _| 1.0 - i as f64);
        let single = LowRankFactor::new(u, v).unwrap();
        let doubled = single.concat(&single);
        assert_eq!(doubled.rank(), 2);
        let r = lr_recompress(&doubled, Tolerance::Absolute(1e-10));
        assert_eq!(r.rank(), 1);
        assert!(r.to_dense().sub(&doubled.to_dense()).norm_max() < 1e-12);
        assert_eq!(lr_recompress(&LowRankFactor::zero(3, 3), Tolerance::Absolute(1e-3)).rank(), 0);
    }

    #[test]
    fn add_identity_and_cancellation() {
        let a = LowRankFactor::new(
            DenseMatrix::from_fn(6, 2, |i, j| libm::sin((i + 3 * j) as f64)),
            DenseMatrix::from_fn(5, 2, |i, j| libm::cos((2 * i + j) as f64)),
        )
        .unwrap();
        let tol = Tolerance::Absolute(1e-12);
        let same = lr_add(&a, &LowRankFactor::zero(6, 5), tol).unwrap();
        assert!(same.to_dense().sub(&a.to_dense()).norm_max() < 1e-14);
        assert_eq!(lr_add(&a, &a.negated(), tol).unwrap().rank(), 0);
        assert!(lr_add(&a, &LowRankFactor::zero(5, 5), tol).is_err());
    }

    #[test]
    fn relative_tolerance_scales_with_norm() {
        let m = DenseMatrix::diagonal(&[1e3, 1.0, 1e-2]);
        assert_eq!(truncated_factor(&m, Tolerance::Relative(1e-4)).rank(), 2);
        assert_eq!(truncated_factor(&m, Tolerance::Absolute(1e-4)).rank(), 3);
        assert_eq!(truncated_factor(&m, Tolerance::Relative(1e-2)).rank(), 1);
    }

    #[test]
    fn scaling_and_slicing() {
        let a = LowRankFactor::new(
            DenseMatrix::from_fn(4, 1, |i, _| i as f64),
            DenseMatrix::from_fn(3, 1, |i, _| 1.0 + i as f64),
        )
        .unwrap();
        let s = a.scale(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, -1.0]);
        let mut dense = a.to_dense();
        dense.scale_rows_cols(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, -1.0]);
        assert_eq!(s.to_dense(), dense);
        assert_eq!(a.slice(1..3, 0..2).to_dense(), a.to_dense().submatrix(1..3, 0..2));
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), a.to_dense().matvec(&[1.0, 1.0, 1.0]));
    }
}
