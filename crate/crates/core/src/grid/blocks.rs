use alloc::vec::Vec;

use super::partition::ring_coords;
use super::{GridNetwork, RingPartition};
use crate::error::{Error, Result};
use crate::hss::SparseStencil;
use crate::linalg::DenseMatrix;

/// The coupling `A[k, k-1]` between ring `k` and the ring inside it.
///
/// Every non-corner node of ring `k` has exactly one neighbour in ring
/// `k - 1`; the four corners have none. Conversely each corner of ring
/// `k - 1` has two outward neighbours. So `A[k, k-1] = -C E`, where `E`
/// picks the inward neighbour of each outer node and `C` holds the bar
/// conductivities.
#[derive(Clone, Debug, PartialEq)]
pub struct RingCoupling {
    inner_size: usize,
    inward: Vec<Option<usize>>,
    cond: Vec<f64>,
}

/// `E` split into an order-preserving injection plus the few rows that
/// repeat an inner node already hit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingSplit {
    /// `injection[q]` is the outer position that first reaches inner node `q`.
    pub injection: Vec<usize>,
    /// `(outer, inner)` pairs not covered by the injection.
    pub repeats: Vec<(usize, usize)>,
}

impl RingCoupling {
    pub fn new(inner_size: usize, inward: Vec<Option<usize>>, cond: Vec<f64>) -> Result<Self> {
        if inward.len() != cond.len() {
            return Err(Error::shape("one conductivity per outer node", cond.len()));
        }
        if let Some(q) = inward.iter().flatten().find(|&&q| q >= inner_size) {
            return Err(Error::IndexOutOfRange { row: 0, col: *q, size: inner_size });
        }
        Ok(Self { inner_size, inward, cond })
    }

    pub fn outer_size(&self) -> usize {
        self.inward.len()
    }

    pub fn inner_size(&self) -> usize {
        self.inner_size
    }

    pub fn inward(&self) -> &[Option<usize>] {
        &self.inward
    }

    /// Bar conductivity per outer node (zero at corners).
    pub fn conductivities(&self) -> &[f64] {
        &self.cond
    }

    /// Nonzeros of `A[k, k-1]`.
    pub fn nnz(&self) -> usize {
        self.inward.iter().flatten().count()
    }

    /// `E x`.
    pub fn gather(&self, inner: &[f64]) -> Vec<f64> {
        self.inward.iter().map(|q| q.map_or(0.0, |q| inner[q])).collect()
    }

    /// `out += E^T y`.
    pub fn scatter_add(&self, outer: &[f64], out: &mut [f64]) {
        for (q, y) in self.inward.iter().zip(outer) {
            if let Some(q) = q {
                out[*q] += y;
            }
        }
    }

    /// `A[k, k-1] x = -C E x`.
    pub fn apply(&self, inner: &[f64]) -> Vec<f64> {
        self.gather(inner).iter().zip(&self.cond).map(|(x, c)| -c * x).collect()
    }

    /// `out += A[k-1, k] y = -E^T C y`.
    pub fn apply_transpose_acc(&self, outer: &[f64], out: &mut [f64]) {
        let scaled: Vec<f64> = outer.iter().zip(&self.cond).map(|(y, c)| -c * y).collect();
        self.scatter_add(&scaled, out);
    }

    pub fn split(&self) -> CouplingSplit {
        let mut injection = alloc::vec![usize::MAX; self.inner_size];
        let mut repeats = Vec::new();
        for (t, q) in self.inward.iter().enumerate() {
            if let Some(q) = *q {
                if injection[q] == usize::MAX {
                    injection[q] = t;
                } else {
                    repeats.push((t, q));
                }
            }
        }
        CouplingSplit { injection, repeats }
    }

    /// Dense `A[k, k-1]`.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.outer_size(), self.inner_size);
        for (t, q) in self.inward.iter().enumerate() {
            if let Some(q) = q {
                d[(t, *q)] = -self.cond[t];
            }
        }
        d
    }
}

/// The matrix blocks owned by one ring: its diagonal block `A[k, k]` and,
/// for `k > 1`, the coupling `A[k, k-1]` (whose transpose is `A[k-1, k]`).
#[derive(Clone, Debug, PartialEq)]
pub struct RingBlocks {
    pub stencil: SparseStencil,
    pub coupling: Option<RingCoupling>,
}

impl RingBlocks {
    /// Entries of the global matrix these blocks stand for, counting both
    /// `A[k, k-1]` and `A[k-1, k]`.
    pub fn matrix_entries(&self) -> usize {
        self.stencil.stored() + 2 * self.coupling.as_ref().map_or(0, |c| c.nnz())
    }
}

/// Sequential access to ring blocks, innermost ring first. The sweep asks
/// for each ring exactly once, so a source may compute blocks on the fly or
/// stream them from slow storage.
pub trait RingSource {
    fn ring_count(&self) -> usize;

    fn next_ring(&mut self) -> Option<RingBlocks>;
}

fn bar_between(g: &GridNetwork, a: (usize, usize), b: (usize, usize)) -> f64 {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    if a.0 == b.0 {
        debug_assert_eq!(a.1 + 1, b.1);
        g.bars(a.0, a.1)[1]
    } else {
        debug_assert_eq!((a.0 + 1, a.1), b);
        g.bars(a.0, a.1)[2]
    }
}

/// Builds the blocks of ring `k` (1-based) directly from the network.
pub fn ring_blocks(g: &GridNetwork, p: &RingPartition, k: usize) -> RingBlocks {
    let m = g.m();
    let coords: Vec<(usize, usize)> = ring_coords(m, k).collect();
    let s = coords.len();
    let main: Vec<f64> = coords.iter().map(|&(i, j)| g.bars(i, j).iter().sum()).collect();
    let off: Vec<f64> = coords.windows(2).map(|w| -bar_between(g, w[0], w[1])).collect();
    let wrap = -bar_between(g, coords[s - 1], coords[0]);
    let stencil = SparseStencil::cyclic(main, off, wrap).expect("ring stencil is well formed");

    let coupling = (k > 1).then(|| {
        let (lo, hi) = (m / 2 - k, m / 2 + k - 1);
        let inner_start = p.ring_range(k - 1).start;
        let mut inward = Vec::with_capacity(s);
        let mut cond = Vec::with_capacity(s);
        for &(i, j) in &coords {
            let [up, right, down, left] = g.bars(i, j);
            let corner = (i == lo || i == hi) && (j == lo || j == hi);
            let (target, c) = if corner {
                (None, 0.0)
            } else if i == lo {
                (Some((i + 1, j)), down)
            } else if i == hi {
                (Some((i - 1, j)), up)
            } else if j == hi {
                (Some((i, j - 1)), left)
            } else {
                (Some((i, j + 1)), right)
            };
            inward.push(target.map(|(ii, jj)| p.perm()[ii * m + jj] - inner_start));
            cond.push(c);
        }
        RingCoupling::new(p.ring_size(k - 1), inward, cond).expect("inward neighbours lie in the inner ring")
    });
    RingBlocks { stencil, coupling }
}

/// Right-hand side per ring: conductivity times temperature summed over the
/// boundary bars of each node. Only the outermost ring is nonzero.
pub fn boundary_rhs(g: &GridNetwork, p: &RingPartition) -> Vec<Vec<f64>> {
    (1..=p.ring_count())
        .map(|k| ring_coords(g.m(), k).map(|(i, j)| g.boundary_load_at(i, j)).collect())
        .collect()
}

/// The block-tridiagonal system in spiral order.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSystem {
    m: usize,
    rings: Vec<RingBlocks>,
    rhs: Vec<Vec<f64>>,
}

pub fn assemble_blocks(g: &GridNetwork, p: &RingPartition) -> Result<BlockSystem> {
    if g.m() != p.m() {
        return Err(Error::InvalidGrid(alloc::format!("network side {} but partition side {}", g.m(), p.m())));
    }
    let rings = (1..=p.ring_count()).map(|k| ring_blocks(g, p, k)).collect();
    Ok(BlockSystem { m: g.m(), rings, rhs: boundary_rhs(g, p) })
}

impl BlockSystem {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ring_count(&self) -> usize {
        self.rings.len()
    }

    /// Blocks of ring `k` (1-based).
    pub fn ring(&self, k: usize) -> &RingBlocks {
        &self.rings[k - 1]
    }

    pub fn rhs(&self) -> &[Vec<f64>] {
        &self.rhs
    }

    /// Right-hand side concatenated in spiral order.
    pub fn rhs_spiral(&self) -> Vec<f64> {
        self.rhs.concat()
    }

    /// Nonzeros of the global matrix.
    pub fn matrix_entries(&self) -> usize {
        self.rings.iter().map(RingBlocks::matrix_entries).sum()
    }

    pub fn source(&self) -> SystemSource<'_> {
        SystemSource { system: self, next: 0 }
    }

    /// Block-tridiagonal product `A x` in spiral order.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut start = 0;
        let mut prev_start = 0;
        for ring in &self.rings {
            let s = ring.stencil.size();
            let xs = &x[start..start + s];
            let mut local = ring.stencil.matvec(xs);
            if let Some(c) = &ring.coupling {
                let inner = &x[prev_start..start];
                for (l, v) in local.iter_mut().zip(c.apply(inner)) {
                    *l += v;
                }
                c.apply_transpose_acc(xs, &mut y[prev_start..start]);
            }
            for (t, v) in local.into_iter().enumerate() {
                y[start + t] = v;
            }
            prev_start = start;
            start += s;
        }
    }

    /// The full matrix in spiral order.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.m * self.m;
        let mut a = DenseMatrix::zeros(n, n);
        let mut start = 0;
        let mut prev_start = 0;
        for ring in &self.rings {
            let s = ring.stencil.size();
            a.set_block(start, start, &ring.stencil.to_dense());
            if let Some(c) = &ring.coupling {
                let block = c.to_dense();
                a.set_block(start, prev_start, &block);
                a.set_block(prev_start, start, &block.transpose());
            }
            prev_start = start;
            start += s;
        }
        a
    }
}

/// Streams the blocks of an assembled system.
#[derive(Clone, Debug)]
pub struct SystemSource<'a> {
    system: &'a BlockSystem,
    next: usize,
}

impl RingSource for SystemSource<'_> {
    fn ring_count(&self) -> usize {
        self.system.ring_count()
    }

    fn next_ring(&mut self) -> Option<RingBlocks> {
        let r = self.system.rings.get(self.next).cloned();
        self.next += 1;
        r
    }
}

/// Generates ring blocks from the network as they are requested, without
/// assembling the system.
#[derive(Clone, Debug)]
pub struct NetworkSource<'a> {
    network: &'a GridNetwork,
    partition: &'a RingPartition,
    next: usize,
}

impl<'a> NetworkSource<'a> {
    pub fn new(network: &'a GridNetwork, partition: &'a RingPartition) -> Self {
        Self { network, partition, next: 1 }
    }
}

impl RingSource for NetworkSource<'_> {
    fn ring_count(&self) -> usize {
        self.partition.ring_count()
    }

    fn next_ring(&mut self) -> Option<RingBlocks> {
        if self.next > self.partition.ring_count() {
            return None;
        }
        let r = ring_blocks(self.network, self.partition, self.next);
        self.next += 1;
        Some(r)
    }
}
