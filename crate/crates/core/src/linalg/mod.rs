//! Dense kernels and tolerance-driven low-rank factorization.

mod dense;
mod lowrank;
mod lu;
mod qr;
mod svd;

pub use dense::DenseMatrix;
pub(crate) use dense::gemm_acc;
pub use lowrank::{lr_add, lr_recompress, truncated_factor, truncated_factor_with, FactorMethod, LowRankFactor, Tolerance};
pub use lu::{dense_invert, dense_solve, Lu, PIVOT_RELATIVE_THRESHOLD};
pub use qr::{pivoted_qr, thin_qr, PivotedQr};
pub use svd::{svd, Svd};

/// Euclidean norm of a vector.
pub fn norm2(x: &[f64]) -> f64 {
    libm::sqrt(x.iter().map(|v| v * v).sum())
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Estimates the spectral norm of `op` (an `rows x cols` operator given by
/// its forward and transposed action) by power iteration on `op^T op`.
///
/// Stops after `max_iter` iterations or once successive estimates agree to
/// `rel_tol`.
pub fn power_norm<F, G>(rows: usize, cols: usize, apply: F, apply_t: G, max_iter: usize, rel_tol: f64) -> f64
where
    F: Fn(&[f64]) -> alloc::vec::Vec<f64>,
    G: Fn(&[f64]) -> alloc::vec::Vec<f64>,
{
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    // Deterministic, non-symmetric start so it is unlikely to be orthogonal
    // to the dominant singular vector.
    let mut x: alloc::vec::Vec<f64> = (0..cols).map(|i| 1.0 + 0.37 * ((i * 7919 % 101) as f64) / 101.0).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let y = apply(&x);
        let z = apply_t(&y);
        let nz = norm2(&z);
        if nz == 0.0 {
            return 0.0;
        }
        let next = libm::sqrt(nz);
        x = z.into_iter().map(|v| v / nz).collect();
        let converged = (next - estimate).abs() <= rel_tol * next;
        estimate = next;
        if converged {
            break;
        }
    }
    estimate
}
