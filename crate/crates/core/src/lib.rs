//! Fast direct inversion of the sparse matrices arising from conduction
//! networks on a uniform square grid.
//!
//! Interior nodes are numbered ring by ring from the center outward, which
//! turns the five-point system matrix into a block-tridiagonal one. The
//! rings are then eliminated one at a time. The dense variant of that sweep
//! costs `O(N^2)`; the fast variant keeps every Schur complement inverse as
//! an [`HssMatrix`] and runs in `O(N log^2 N)`.
//!
//! The crate is `no_std` (it needs `alloc`). IO, timing and the command line
//! live in the companion `netinv-cli` crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod grid;
pub mod hss;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{assemble_blocks, boundary_rhs, build_grid, spiral_partition, BlockSystem, GridNetwork, RingPartition};
pub use hss::{HssMatrix, HssStats, SparseStencil};
pub use linalg::{dense_invert, DenseMatrix, LowRankFactor, Tolerance};
pub use solver::{
    apply_boundary_solve, back_substitute, boundary_operator, solve_network, sweep, sweep_dense, sweep_hss, BoundaryOperator,
    Method, SweepMode, SweepState,
};
