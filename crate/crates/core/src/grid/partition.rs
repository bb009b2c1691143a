use alloc::vec::Vec;
use core::ops::Range;

use super::network::check_side;
use crate::error::Result;

/// Spiral ordering of the interior nodes.
///
/// Ring `k` (1-based, `1..=m/2`) is the square loop of side `2k` around the
/// grid center and holds `8k - 4` nodes. Rings are numbered from the center
/// outward; within a ring the order starts at the top-left node and runs
/// clockwise, so consecutive nodes (and the last and first) are neighbours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingPartition {
    m: usize,
    /// `order[s]` is the row-major index of spiral position `s`.
    order: Vec<usize>,
    /// `perm[k]` is the spiral position of row-major index `k`.
    perm: Vec<usize>,
    /// Start of each ring in spiral order, plus the total at the end.
    offsets: Vec<usize>,
}

/// Interior coordinates of ring `k`'s nodes in clockwise order from the top-left.
pub(crate) fn ring_coords(m: usize, k: usize) -> impl Iterator<Item = (usize, usize)> {
    let lo = m / 2 - k;
    let hi = m / 2 + k - 1;
    let top = (lo..=hi).map(move |j| (lo, j));
    let right = (lo + 1..=hi).map(move |i| (i, hi));
    let bottom = (lo..hi).rev().map(move |j| (hi, j));
    let left = (lo + 1..hi).rev().map(move |i| (i, lo));
    top.chain(right).chain(bottom).chain(left)
}

pub fn spiral_partition(m: usize) -> Result<RingPartition> {
    check_side(m)?;
    let rings = m / 2;
    let mut order = Vec::with_capacity(m * m);
    let mut offsets = Vec::with_capacity(rings + 1);
    for k in 1..=rings {
        offsets.push(order.len());
        order.extend(ring_coords(m, k).map(|(i, j)| i * m + j));
    }
    offsets.push(order.len());
    let mut perm = alloc::vec![0; m * m];
    for (s, &k) in order.iter().enumerate() {
        perm[k] = s;
    }
    Ok(RingPartition { m, order, perm, offsets })
}

impl RingPartition {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ring_count(&self) -> usize {
        self.m / 2
    }

    /// Size of ring `k` (1-based), `8k - 4`.
    pub fn ring_size(&self, k: usize) -> usize {
        8 * k - 4
    }

    /// Spiral positions (0-based) of ring `k` (1-based).
    pub fn ring_range(&self, k: usize) -> Range<usize> {
        self.offsets[k - 1]..self.offsets[k]
    }

    /// Row-major index of each spiral position.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Spiral position of each row-major index.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Interior coordinates `(row, col)` of a spiral position.
    pub fn coords(&self, spiral: usize) -> (usize, usize) {
        let k = self.order[spiral];
        (k / self.m, k % self.m)
    }

    pub fn to_spiral(&self, row_major: &[f64]) -> Vec<f64> {
        self.order.iter().map(|&k| row_major[k]).collect()
    }

    pub fn to_row_major(&self, spiral: &[f64]) -> Vec<f64> {
        self.perm.iter().map(|&s| spiral[s]).collect()
    }
}
