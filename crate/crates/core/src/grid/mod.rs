//! The conduction network on a square grid, its spiral (ring-by-ring)
//! ordering and the block-tridiagonal system that ordering produces.

mod blocks;
mod network;
mod partition;

pub use blocks::{
    assemble_blocks, boundary_rhs, ring_blocks, BlockSystem, CouplingSplit, NetworkSource, RingBlocks, RingCoupling, RingSource,
    SystemSource,
};
pub use network::{build_grid, GridNetwork};
pub use partition::{spiral_partition, RingPartition};
