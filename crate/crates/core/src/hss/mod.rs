//! Hierarchically semiseparable (HSS) matrices.
//!
//! A square matrix is split by recursive bisection of its index range. Each
//! split stores its two off-diagonal blocks as [`LowRankFactor`]s and
//! recurses on the diagonal blocks until they are small enough to keep
//! dense. With off-diagonal ranks bounded by `p`, storage and matrix-vector
//! products cost `O(p n log n)` and inversion costs `O(p n log^2 n)`.

mod build;
mod invert;
mod stencil;
mod update;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::ops::Range;

pub use build::BlockAccess;
pub use stencil::SparseStencil;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LowRankFactor, Tolerance};

/// Default leaf size threshold.
pub const DEFAULT_LEAF_MAX: usize = 64;

/// Largest size [`HssMatrix::densify`] will materialize.
pub const DEFAULT_DENSIFY_CAP: usize = 8192;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Node {
    Leaf(DenseMatrix),
    Branch(Box<Branch>),
}

/// An interior node covering `lo` followed by `hi`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Branch {
    size: usize,
    lo: Node,
    hi: Node,
    /// Block `(lo, hi)`, shape `|lo| x |hi|`.
    upper: LowRankFactor,
    /// Block `(hi, lo)`, shape `|hi| x |lo|`.
    lower: LowRankFactor,
}

impl Node {
    pub(crate) fn size(&self) -> usize {
        match self {
            Node::Leaf(b) => b.rows(),
            Node::Branch(b) => b.size,
        }
    }

    pub(crate) fn branch(lo: Node, hi: Node, upper: LowRankFactor, lower: LowRankFactor) -> Node {
        debug_assert_eq!((upper.rows(), upper.cols()), (lo.size(), hi.size()));
        debug_assert_eq!((lower.rows(), lower.cols()), (hi.size(), lo.size()));
        Node::Branch(Box::new(Branch { size: lo.size() + hi.size(), lo, hi, upper, lower }))
    }

    /// `y += self * x`, with `x` and `y` row-major blocks of `r` columns.
    fn apply_acc(&self, x: &[f64], r: usize, y: &mut [f64]) {
        match self {
            Node::Leaf(b) => crate::linalg::gemm_acc(b.rows(), b.cols(), r, 1.0, b.as_slice(), x, y),
            Node::Branch(b) => {
                let s = b.lo.size() * r;
                let (x_lo, x_hi) = x.split_at(s);
                let (y_lo, y_hi) = y.split_at_mut(s);
                b.lo.apply_acc(x_lo, r, y_lo);
                b.upper.apply_acc(x_hi, r, y_lo);
                b.lower.apply_acc(x_lo, r, y_hi);
                b.hi.apply_acc(x_hi, r, y_hi);
            }
        }
    }

    /// `y += self^T * x`.
    fn apply_tr_acc(&self, x: &[f64], r: usize, y: &mut [f64]) {
        match self {
            Node::Leaf(b) => {
                for (i, row) in (0..b.rows()).map(|i| (i, b.row(i))) {
                    let xi = &x[i * r..(i + 1) * r];
                    for (j, &a) in row.iter().enumerate() {
                        if a != 0.0 {
                            for (yv, xv) in y[j * r..(j + 1) * r].iter_mut().zip(xi) {
                                *yv += a * xv;
                            }
                        }
                    }
                }
            }
            Node::Branch(b) => {
                let s = b.lo.size() * r;
                let (x_lo, x_hi) = x.split_at(s);
                let (y_lo, y_hi) = y.split_at_mut(s);
                b.lo.apply_tr_acc(x_lo, r, y_lo);
                b.lower.apply_tr_acc(x_hi, r, y_lo);
                b.upper.apply_tr_acc(x_lo, r, y_hi);
                b.hi.apply_tr_acc(x_hi, r, y_hi);
            }
        }
    }

    pub(crate) fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut y = DenseMatrix::zeros(self.size(), x.cols());
        self.apply_acc(x.as_slice(), x.cols(), y.as_mut_slice());
        y
    }

    pub(crate) fn apply_tr(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut y = DenseMatrix::zeros(self.size(), x.cols());
        self.apply_tr_acc(x.as_slice(), x.cols(), y.as_mut_slice());
        y
    }

    fn scale(&self, left: &[f64], right: &[f64]) -> Node {
        match self {
            Node::Leaf(b) => {
                let mut b = b.clone();
                b.scale_rows_cols(left, right);
                Node::Leaf(b)
            }
            Node::Branch(b) => {
                let s = b.lo.size();
                let (l_lo, l_hi) = left.split_at(s);
                let (r_lo, r_hi) = right.split_at(s);
                Node::branch(
                    b.lo.scale(l_lo, r_lo),
                    b.hi.scale(l_hi, r_hi),
                    b.upper.scale(l_lo, r_hi),
                    b.lower.scale(l_hi, r_lo),
                )
            }
        }
    }

    fn collect_stats(&self, level: usize, stats: &mut HssStats) {
        stats.depth = stats.depth.max(level);
        match self {
            Node::Leaf(b) => {
                stats.leaves += 1;
                stats.max_leaf = stats.max_leaf.max(b.rows());
                stats.total_floats += b.rows() * b.cols();
            }
            Node::Branch(b) => {
                stats.max_rank = stats.max_rank.max(b.upper.rank()).max(b.lower.rank());
                stats.total_floats += b.upper.storage() + b.lower.storage();
                b.lo.collect_stats(level + 1, stats);
                b.hi.collect_stats(level + 1, stats);
            }
        }
    }

    fn tessellation(&self, start: usize) -> TessellationNode {
        match self {
            Node::Leaf(b) => TessellationNode { start, size: b.rows(), upper_rank: None, lower_rank: None, children: Vec::new() },
            Node::Branch(b) => TessellationNode {
                start,
                size: b.size,
                upper_rank: Some(b.upper.rank()),
                lower_rank: Some(b.lower.rank()),
                children: alloc::vec![b.lo.tessellation(start), b.hi.tessellation(start + b.lo.size())],
            },
        }
    }

    fn collect_off_ranks(&self, out: &mut Vec<BranchInfo>, start: usize) {
        if let Node::Branch(b) = self {
            out.push(BranchInfo {
                start,
                lo_size: b.lo.size(),
                hi_size: b.hi.size(),
                upper_rank: b.upper.rank(),
                lower_rank: b.lower.rank(),
            });
            b.lo.collect_off_ranks(out, start);
            b.hi.collect_off_ranks(out, start + b.lo.size());
        }
    }
}

/// Storage and shape summary of an [`HssMatrix`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HssStats {
    /// Largest off-diagonal rank.
    pub max_rank: usize,
    /// Stored 64-bit values (leaf blocks plus both factors of every
    /// off-diagonal block).
    pub total_floats: usize,
    /// Number of branch levels on the longest root-to-leaf path.
    pub depth: usize,
    pub leaves: usize,
    pub max_leaf: usize,
}

/// Position and off-diagonal ranks of one branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BranchInfo {
    pub start: usize,
    pub lo_size: usize,
    pub hi_size: usize,
    pub upper_rank: usize,
    pub lower_rank: usize,
}

/// One node of the tessellation tree, for inspection and debugging dumps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TessellationNode {
    pub start: usize,
    pub size: usize,
    pub upper_rank: Option<usize>,
    pub lower_rank: Option<usize>,
    pub children: Vec<TessellationNode>,
}

/// Square matrix in HSS form. Values are immutable; every operation returns
/// a new matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HssMatrix {
    root: Node,
    leaf_max: usize,
    tol: Tolerance,
}

impl HssMatrix {
    pub(crate) fn from_root(root: Node, leaf_max: usize, tol: Tolerance) -> Self {
        Self { root, leaf_max, tol }
    }

    /// The `n x n` zero matrix on the balanced bisection with the given leaf size.
    pub fn zeros(n: usize, leaf_max: usize, tol: Tolerance) -> Self {
        fn zero_node(n: usize, leaf_max: usize) -> Node {
            if n <= leaf_max {
                Node::Leaf(DenseMatrix::zeros(n, n))
            } else {
                let s = n / 2;
                Node::branch(
                    zero_node(s, leaf_max),
                    zero_node(n - s, leaf_max),
                    LowRankFactor::zero(s, n - s),
                    LowRankFactor::zero(n - s, s),
                )
            }
        }
        Self { root: zero_node(n, leaf_max.max(1)), leaf_max: leaf_max.max(1), tol }
    }

    pub fn identity(n: usize, leaf_max: usize, tol: Tolerance) -> Self {
        Self::from_dense(&DenseMatrix::identity(n), leaf_max, tol).expect("identity is square")
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn leaf_max(&self) -> usize {
        self.leaf_max
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn stats(&self) -> HssStats {
        let mut s = HssStats::default();
        self.root.collect_stats(0, &mut s);
        s
    }

    pub fn tessellation(&self) -> TessellationNode {
        self.root.tessellation(0)
    }

    /// Every branch in preorder.
    pub fn branches(&self) -> Vec<BranchInfo> {
        let mut out = Vec::new();
        self.root.collect_off_ranks(&mut out, 0);
        out
    }

    /// True when some leaf has grown past twice the leaf threshold.
    pub fn needs_retessellation(&self) -> bool {
        self.stats().max_leaf > 2 * self.leaf_max
    }

    /// Materializes the represented matrix; refuses sizes above
    /// [`DEFAULT_DENSIFY_CAP`].
    pub fn densify(&self) -> Result<DenseMatrix> {
        self.densify_capped(DEFAULT_DENSIFY_CAP)
    }

    pub fn densify_capped(&self, cap: usize) -> Result<DenseMatrix> {
        let n = self.size();
        if n > cap {
            return Err(Error::TooLarge { size: n, cap });
        }
        Ok(build::extract_dense(&self.root, 0..n, 0..n))
    }

    /// Dense copy of an arbitrary block.
    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> Result<DenseMatrix> {
        let n = self.size();
        if rows.end > n || cols.end > n || rows.start > rows.end || cols.start > cols.end {
            return Err(Error::IndexOutOfRange { row: rows.end, col: cols.end, size: n });
        }
        Ok(build::extract_dense(&self.root, rows, cols))
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.size() {
            return Err(Error::shape("vector of the matrix size", x.len()));
        }
        let mut y = alloc::vec![0.0; x.len()];
        self.root.apply_acc(x, 1, &mut y);
        Ok(y)
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.size() {
            return Err(Error::shape("vector of the matrix size", x.len()));
        }
        let mut y = alloc::vec![0.0; x.len()];
        self.root.apply_tr_acc(x, 1, &mut y);
        Ok(y)
    }

    /// `self * x` for a thin block `x` with `n` rows.
    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.rows() != self.size() {
            return Err(Error::shape("block with the matrix size as row count", x.rows()));
        }
        Ok(self.root.apply(x))
    }

    /// `self^T * x`.
    pub fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.rows() != self.size() {
            return Err(Error::shape("block with the matrix size as row count", x.rows()));
        }
        Ok(self.root.apply_tr(x))
    }

    /// `diag(left) * self * diag(right)`. Exact; ranks are unchanged.
    pub fn scale(&self, left: &[f64], right: &[f64]) -> Result<HssMatrix> {
        let n = self.size();
        if left.len() != n || right.len() != n {
            return Err(Error::shape("scaling vectors of the matrix size", alloc::format!("{} / {}", left.len(), right.len())));
        }
        Ok(Self { root: self.root.scale(left, right), ..self.clone() })
    }

    /// `-self`.
    pub fn negated(&self) -> HssMatrix {
        let ones = alloc::vec![1.0; self.size()];
        let minus: Vec<f64> = alloc::vec![-1.0; self.size()];
        Self { root: self.root.scale(&minus, &ones), ..self.clone() }
    }

    pub(crate) fn root(&self) -> &Node {
        &self.root
    }
}
