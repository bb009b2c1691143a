use alloc::vec::Vec;
use core::ops::Range;

use super::{HssMatrix, Node};
use crate::error::{Error, Result};
use crate::linalg::{lr_recompress, truncated_factor, DenseMatrix, LowRankFactor, Tolerance};

/// Random access to the blocks of a square matrix, as needed to tessellate it.
pub trait BlockAccess {
    fn size(&self) -> usize;

    /// Dense copy of `rows x cols`.
    fn dense_block(&self, rows: Range<usize>, cols: Range<usize>) -> DenseMatrix;

    /// Low-rank approximation of the block `rows x cols`, where the two
    /// ranges are disjoint.
    fn lowrank_block(&self, rows: Range<usize>, cols: Range<usize>, tol: Tolerance) -> LowRankFactor;
}

impl BlockAccess for DenseMatrix {
    fn size(&self) -> usize {
        self.rows()
    }

    fn dense_block(&self, rows: Range<usize>, cols: Range<usize>) -> DenseMatrix {
        self.submatrix(rows, cols)
    }

    fn lowrank_block(&self, rows: Range<usize>, cols: Range<usize>, tol: Tolerance) -> LowRankFactor {
        truncated_factor(&self.submatrix(rows, cols), tol)
    }
}

impl BlockAccess for HssMatrix {
    fn size(&self) -> usize {
        HssMatrix::size(self)
    }

    fn dense_block(&self, rows: Range<usize>, cols: Range<usize>) -> DenseMatrix {
        extract_dense(self.root(), rows, cols)
    }

    fn lowrank_block(&self, rows: Range<usize>, cols: Range<usize>, tol: Tolerance) -> LowRankFactor {
        extract_lowrank(self.root(), rows, cols, tol)
    }
}

/// Tessellates `src` over `range` by midpoint bisection.
pub(crate) fn build_node<S: BlockAccess + ?Sized>(src: &S, range: Range<usize>, leaf_max: usize, tol: Tolerance) -> Node {
    let n = range.len();
    if n <= leaf_max {
        return Node::Leaf(src.dense_block(range.clone(), range));
    }
    let mid = range.start + n / 2;
    let upper = src.lowrank_block(range.start..mid, mid..range.end, tol);
    let lower = src.lowrank_block(mid..range.end, range.start..mid, tol);
    let lo = build_node(src, range.start..mid, leaf_max, tol);
    let hi = build_node(src, mid..range.end, leaf_max, tol);
    Node::branch(lo, hi, upper, lower)
}

/// Splits `r` (relative to a node) at `s` into the part inside the low
/// child and the part inside the high child (shifted by `s`).
fn split(r: &Range<usize>, s: usize) -> (Range<usize>, Range<usize>) {
    let lo = r.start.min(s)..r.end.min(s);
    let hi = r.start.max(s) - s..r.end.max(s) - s;
    (lo, hi)
}

pub(crate) fn extract_dense(node: &Node, rows: Range<usize>, cols: Range<usize>) -> DenseMatrix {
    match node {
        Node::Leaf(b) => b.submatrix(rows, cols),
        Node::Branch(b) => {
            let s = b.lo.size();
            let (rl, rh) = split(&rows, s);
            let (cl, ch) = split(&cols, s);
            let mut out = DenseMatrix::zeros(rows.len(), cols.len());
            let (nr, nc) = (rl.len(), cl.len());
            if !rl.is_empty() && !cl.is_empty() {
                out.set_block(0, 0, &extract_dense(&b.lo, rl.clone(), cl.clone()));
            }
            if !rl.is_empty() && !ch.is_empty() {
                out.set_block(0, nc, &b.upper.slice(rl.clone(), ch.clone()).to_dense());
            }
            if !rh.is_empty() && !cl.is_empty() {
                out.set_block(nr, 0, &b.lower.slice(rh.clone(), cl).to_dense());
            }
            if !rh.is_empty() && !ch.is_empty() {
                out.set_block(nr, nc, &extract_dense(&b.hi, rh, ch));
            }
            out
        }
    }
}

/// Low-rank form of a block whose row and column ranges are disjoint.
pub(crate) fn extract_lowrank(node: &Node, rows: Range<usize>, cols: Range<usize>, tol: Tolerance) -> LowRankFactor {
    let (m, n) = (rows.len(), cols.len());
    if m == 0 || n == 0 {
        return LowRankFactor::zero(m, n);
    }
    match node {
        Node::Leaf(b) => truncated_factor(&b.submatrix(rows, cols), tol),
        Node::Branch(b) => {
            let s = b.lo.size();
            let (rl, rh) = split(&rows, s);
            let (cl, ch) = split(&cols, s);
            let (nr, nc) = (rl.len(), cl.len());
            let mut pieces: Vec<(LowRankFactor, usize, usize)> = Vec::with_capacity(4);
            if !rl.is_empty() && !cl.is_empty() {
                pieces.push((extract_lowrank(&b.lo, rl.clone(), cl.clone(), tol), 0, 0));
            }
            if !rl.is_empty() && !ch.is_empty() {
                pieces.push((b.upper.slice(rl.clone(), ch.clone()), 0, nc));
            }
            if !rh.is_empty() && !cl.is_empty() {
                pieces.push((b.lower.slice(rh.clone(), cl), nr, 0));
            }
            if !rh.is_empty() && !ch.is_empty() {
                pieces.push((extract_lowrank(&b.hi, rh, ch, tol), nr, nc));
            }
            let combined = pieces
                .iter()
                .map(|(f, r0, c0)| f.padded(m, n, *r0, *c0))
                .reduce(|a, b| a.concat(&b))
                .unwrap_or_else(|| LowRankFactor::zero(m, n));
            lr_recompress(&combined, tol)
        }
    }
}

fn is_balanced(node: &Node, leaf_max: usize) -> bool {
    let n = node.size();
    match node {
        Node::Leaf(_) => n <= leaf_max,
        Node::Branch(b) => n > leaf_max && b.lo.size() == n / 2 && is_balanced(&b.lo, leaf_max) && is_balanced(&b.hi, leaf_max),
    }
}

impl HssMatrix {
    /// Compresses a dense square matrix on the balanced bisection of `[0, n)`.
    pub fn from_dense(m: &DenseMatrix, leaf_max: usize, tol: Tolerance) -> Result<HssMatrix> {
        if !m.is_square() {
            return Err(Error::shape("square matrix", alloc::format!("{}x{}", m.rows(), m.cols())));
        }
        let leaf_max = leaf_max.max(1);
        Ok(HssMatrix::from_root(build_node(m, 0..m.rows(), leaf_max, tol), leaf_max, tol))
    }

    /// Rebuilds the tessellation as the balanced bisection with leaves of at
    /// most `leaf_max`. A matrix already in that shape is returned as is.
    pub fn retessellate(&self, leaf_max: usize, tol: Tolerance) -> HssMatrix {
        let leaf_max = leaf_max.max(1);
        if is_balanced(self.root(), leaf_max) {
            return HssMatrix::from_root(self.root().clone(), leaf_max, tol);
        }
        HssMatrix::from_root(build_node(self, 0..self.size(), leaf_max, tol), leaf_max, tol)
    }

    /// True if the tree is the balanced bisection for its leaf threshold.
    pub fn is_balanced(&self) -> bool {
        is_balanced(self.root(), self.leaf_max())
    }
}
