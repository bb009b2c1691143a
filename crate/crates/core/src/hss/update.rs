use alloc::vec::Vec;

use super::{HssMatrix, Node, SparseStencil};
use crate::error::{Error, Result};
use crate::linalg::{lr_recompress, DenseMatrix, LowRankFactor, Tolerance};

pub(super) fn update_node(node: &Node, u: &DenseMatrix, v: &DenseMatrix, tol: Tolerance) -> Node {
    match node {
        Node::Leaf(b) => {
            let mut b = b.clone();
            b.add_assign(&u.matmul_tr(v));
            Node::Leaf(b)
        }
        Node::Branch(b) => {
            let (s, n) = (b.lo.size(), b.size);
            let (u_lo, u_hi) = (u.row_block(0..s), u.row_block(s..n));
            let (v_lo, v_hi) = (v.row_block(0..s), v.row_block(s..n));
            let upper = LowRankFactor::new(u_lo.clone(), v_hi.clone()).expect("equal ranks");
            let lower = LowRankFactor::new(u_hi.clone(), v_lo.clone()).expect("equal ranks");
            Node::branch(
                update_node(&b.lo, &u_lo, &v_lo, tol),
                update_node(&b.hi, &u_hi, &v_hi, tol),
                lr_recompress(&b.upper.concat(&upper), tol),
                lr_recompress(&b.lower.concat(&lower), tol),
            )
        }
    }
}

/// `update` as a sum of single entries landing in off-diagonal blocks.
fn sparse_factor(rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> LowRankFactor {
    let k = entries.len();
    let mut u = DenseMatrix::zeros(rows, k);
    let mut v = DenseMatrix::zeros(cols, k);
    for (p, &(i, j, val)) in entries.iter().enumerate() {
        u[(i, p)] = val;
        v[(j, p)] = 1.0;
    }
    LowRankFactor::new(u, v).expect("equal ranks")
}

fn add_entries_node(node: &Node, entries: Vec<(usize, usize, f64)>, tol: Tolerance) -> Node {
    if entries.is_empty() {
        return node.clone();
    }
    match node {
        Node::Leaf(b) => {
            let mut b = b.clone();
            for (i, j, v) in entries {
                b[(i, j)] += v;
            }
            Node::Leaf(b)
        }
        Node::Branch(b) => {
            let s = b.lo.size();
            let (mut lo, mut hi, mut up, mut down) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
            for (i, j, v) in entries {
                match (i < s, j < s) {
                    (true, true) => lo.push((i, j, v)),
                    (false, false) => hi.push((i - s, j - s, v)),
                    (true, false) => up.push((i, j - s, v)),
                    (false, true) => down.push((i - s, j, v)),
                }
            }
            let hs = b.size - s;
            let upper = if up.is_empty() {
                b.upper.clone()
            } else {
                lr_recompress(&b.upper.concat(&sparse_factor(s, hs, &up)), tol)
            };
            let lower = if down.is_empty() {
                b.lower.clone()
            } else {
                lr_recompress(&b.lower.concat(&sparse_factor(hs, s, &down)), tol)
            };
            Node::branch(add_entries_node(&b.lo, lo, tol), add_entries_node(&b.hi, hi, tol), upper, lower)
        }
    }
}

/// Copies `m`'s rows into a zero matrix with `rows` rows at the given positions.
fn scatter_rows(m: &DenseMatrix, rows: usize, positions: impl Iterator<Item = usize>) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(rows, m.cols());
    for (i, p) in positions.enumerate() {
        out.row_mut(p).copy_from_slice(m.row(i));
    }
    out
}

/// `map` holds the absolute target position of each index of `node`;
/// `start..end` is the target range the node will cover.
fn embed_node(node: &Node, map: &[usize], start: usize, end: usize) -> Node {
    match node {
        Node::Leaf(b) => {
            let n = end - start;
            let mut out = DenseMatrix::zeros(n, n);
            for (i, &pi) in map.iter().enumerate() {
                let row = b.row(i);
                let dst = out.row_mut(pi - start);
                for (j, &pj) in map.iter().enumerate() {
                    dst[pj - start] = row[j];
                }
            }
            Node::Leaf(out)
        }
        Node::Branch(b) => {
            let s = b.lo.size();
            let mid = map[s - 1] + 1;
            let (map_lo, map_hi) = map.split_at(s);
            let lo_pos = || map_lo.iter().map(|p| p - start);
            let hi_pos = || map_hi.iter().map(|p| p - mid);
            let (nl, nh) = (mid - start, end - mid);
            let upper = LowRankFactor::new(
                scatter_rows(b.upper.left(), nl, lo_pos()),
                scatter_rows(b.upper.right(), nh, hi_pos()),
            )
            .expect("equal ranks");
            let lower = LowRankFactor::new(
                scatter_rows(b.lower.left(), nh, hi_pos()),
                scatter_rows(b.lower.right(), nl, lo_pos()),
            )
            .expect("equal ranks");
            Node::branch(embed_node(&b.lo, map_lo, start, mid), embed_node(&b.hi, map_hi, mid, end), upper, lower)
        }
    }
}

impl HssMatrix {
    /// `self + u v^T`. Leaves absorb the update densely; every off-diagonal
    /// block absorbs its piece and is recompressed to `tol`.
    pub fn lowrank_update(&self, update: &LowRankFactor, tol: Tolerance) -> Result<HssMatrix> {
        let n = self.size();
        if update.rows() != n || update.cols() != n {
            return Err(Error::shape("update of the matrix size", alloc::format!("{}x{}", update.rows(), update.cols())));
        }
        if update.rank() == 0 {
            return Ok(self.clone());
        }
        let root = update_node(self.root(), update.left(), update.right(), tol);
        Ok(HssMatrix::from_root(root, self.leaf_max(), self.tolerance()))
    }

    /// Adds a list of `(row, col, value)` entries. Entries inside a leaf are
    /// added densely; the rest become rank-one updates of the off-diagonal
    /// block they fall into.
    pub fn add_entries(&self, entries: &[(usize, usize, f64)], tol: Tolerance) -> Result<HssMatrix> {
        let n = self.size();
        if let Some(&(row, col, _)) = entries.iter().find(|(i, j, _)| *i >= n || *j >= n) {
            return Err(Error::IndexOutOfRange { row, col, size: n });
        }
        let nonzero: Vec<_> = entries.iter().copied().filter(|e| e.2 != 0.0).collect();
        Ok(HssMatrix::from_root(add_entries_node(self.root(), nonzero, tol), self.leaf_max(), self.tolerance()))
    }

    /// `self + stencil`.
    pub fn add_stencil(&self, stencil: &SparseStencil, tol: Tolerance) -> Result<HssMatrix> {
        if stencil.size() != self.size() {
            return Err(Error::shape("stencil of the matrix size", stencil.size()));
        }
        let entries: Vec<_> = stencil.entries().collect();
        self.add_entries(&entries, tol)
    }

    /// Scatters `self` into a `target_size` matrix: entry `(i, j)` moves to
    /// `(map[i], map[j])` and every other entry is zero.
    ///
    /// The tree shape is kept; each node widens to absorb the skipped
    /// positions next to it, so no rank changes. Leaves grow accordingly, see
    /// [`HssMatrix::needs_retessellation`].
    pub fn embed(&self, target_size: usize, map: &[usize]) -> Result<HssMatrix> {
        if map.len() != self.size() {
            return Err(Error::InvalidPositionMap("length differs from the matrix size"));
        }
        if map.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPositionMap("positions must be strictly increasing"));
        }
        if map.last().is_some_and(|&p| p >= target_size) {
            return Err(Error::InvalidPositionMap("position beyond the target size"));
        }
        if map.is_empty() {
            return Ok(HssMatrix::zeros(target_size, self.leaf_max(), self.tolerance()));
        }
        Ok(HssMatrix::from_root(embed_node(self.root(), map, 0, target_size), self.leaf_max(), self.tolerance()))
    }
}
