use alloc::vec::Vec;

use super::{dot, DenseMatrix};

/// Thin singular value decomposition `A = U diag(s) V^T`, singular values
/// in descending order. Columns of `U` belonging to zero singular values
/// are left as zero vectors.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

const MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD. Accurate to high relative precision;
/// intended for the small cores of low-rank factors and for oracles.
pub fn svd(a: &DenseMatrix) -> Svd {
    if a.rows() < a.cols() {
        let t = svd(&a.transpose());
        return Svd { u: t.v, s: t.s, v: t.u };
    }
    let (m, n) = (a.rows(), a.cols());
    // Row j of `w` is column j of the working matrix, row j of `vt` column j of V.
    let mut w = a.transpose();
    let mut vt = DenseMatrix::identity(n);
    let tol = 1e-15;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (wp, wq) = pair_rows(&mut w, p, q);
                let alpha = dot(wp, wp);
                let beta = dot(wq, wq);
                let gamma = dot(wp, wq);
                if gamma == 0.0 || gamma.abs() <= tol * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(wp, wq, c, s);
                let (vp, vq) = pair_rows(&mut vt, p, q);
                rotate(vp, vq, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(usize, f64)> = (0..n).map(|j| (j, libm::sqrt(dot(w.row(j), w.row(j))))).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut u = DenseMatrix::zeros(m, n);
    let mut v = DenseMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &(j, sigma)) in order.iter().enumerate() {
        s.push(sigma);
        if sigma > 0.0 {
            for (i, x) in w.row(j).iter().enumerate() {
                u[(i, k)] = x / sigma;
            }
        }
        for (i, x) in vt.row(j).iter().enumerate() {
            v[(i, k)] = *x;
        }
    }
    Svd { u, s, v }
}

fn pair_rows(m: &mut DenseMatrix, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let c = m.cols();
    let (head, tail) = m.as_mut_slice().split_at_mut(q * c);
    (&mut head[p * c..(p + 1) * c], &mut tail[..c])
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}
