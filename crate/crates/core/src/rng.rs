//! Seeded random streams.
//!
//! Every random quantity in the crate comes from [`SeededRng`], a ChaCha8
//! generator keyed by a caller-supplied 64-bit seed (`seed_from_u64` as
//! defined by `rand_core` 0.6). Uniform variates use the top 53 bits of one
//! `next_u64` draw, so streams are reproducible bit for bit on any platform.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Stream used for grid conductivities.
pub const STREAM_CONDUCTIVITY: u64 = 0;
/// Stream used for random probe vectors.
pub const STREAM_PROBE: u64 = 1;
/// Stream used for random boundary temperatures.
pub const STREAM_BOUNDARY: u64 = 2;

#[derive(Clone, Debug)]
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[low, high)`; exactly `low` when the interval is empty.
    pub fn uniform_in(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.uniform()
    }

    /// Standard normal variate (Box-Muller, one draw per call).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
    }

    /// Uniformly distributed direction on the unit sphere in `R^n`.
    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| self.normal()).collect();
        let norm = crate::linalg::norm2(&v);
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }
}
