
use alloc::vec::Vec;

use super::{dot, norm2, DenseMatrix};

/// Truncated column-pivoted QR, `A ≈ Q R` with `Q` (m x k) orthonormal and
/// `R` (k x n) stored with its columns back in the original order.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
    /// Frobenius norm of the discarded trailing block; an upper bound on the
    /// spectral error of `Q R`.
    pub residual: f64,
}

impl PivotedQr {
    pub fn rank(&self) -> usize {
        self.q.cols()
    }
}

/// Householder QR without pivoting: `A = Q R`, `Q` (m x p), `R` (p x n),
/// `p = min(m, n)`.
pub fn thin_qr(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let f = householder(a, false, None);
    (f.q, f.r)
}

/// Column-pivoted Householder QR that stops as soon as the Frobenius norm
/// of the trailing block is at most `stop`.
pub fn pivoted_qr(a: &DenseMatrix, stop: f64) -> PivotedQr {
    householder(a, true, Some(stop))
}

fn householder(a: &DenseMatrix, pivot: bool, stop: Option<f64>) -> PivotedQr {
    let (m, n) = (a.rows(), a.cols());
    let p = m.min(n);
    // Column-major working copy: row j of `cols` is column j of `a`.
    let mut cols = a.transpose();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(p);
    let mut norms: Vec<f64> = (0..n).map(|j| dot(cols.row(j), cols.row(j))).collect();
    let mut residual = 0.0;
    let mut k = 0;
    while k < p {
        if let Some(stop) = stop {
            let trailing = libm::sqrt(norms[k..].iter().sum::<f64>().max(0.0));
            if trailing <= stop {
                residual = trailing;
                break;
            }
        }
        if pivot {
            let best = (k..n).fold(k, |b, j| if norms[j] > norms[b] { j } else { b });
            if best != k {
                perm.swap(k, best);
                norms.swap(k, best);
                let d = cols.as_mut_slice();
                for i in 0..m {
                    d.swap(k * m + i, best * m + i);
                }
            }
        }
        let x = &cols.row(k)[k..];
        let xnorm = norm2(x);
        let mut v = x.to_vec();
        let (alpha, beta) = if xnorm == 0.0 {
            (0.0, 0.0)
        } else {
            let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
            v[0] -= alpha;
            let vv = dot(&v, &v);
            (alpha, if vv == 0.0 { 0.0 } else { 2.0 / vv })
        };
        {
            let ck = cols.row_mut(k);
            ck[k] = alpha;
            ck[k + 1..].iter_mut().for_each(|e| *e = 0.0);
        }
        if beta != 0.0 {
            for j in k + 1..n {
                let cj = &mut cols.row_mut(j)[k..];
                let w = beta * dot(&v, cj);
                for (c, vi) in cj.iter_mut().zip(&v) {
                    *c -= w * vi;
                }
            }
        }
        for j in k + 1..n {
            let tail = &cols.row(j)[k + 1..];
            norms[j] = dot(tail, tail);
        }
        reflectors.push((v, beta));
        k += 1;
    }
    if k == p {
        residual = if stop.is_some() { libm::sqrt(norms[p..].iter().sum::<f64>().max(0.0)) } else { 0.0 };
    }

    let mut r = DenseMatrix::zeros(k, n);
    for (l, &orig) in perm.iter().enumerate() {
        let c = cols.row(l);
        for i in 0..k.min(l + 1) {
            r[(i, orig)] = c[i];
        }
    }

    // Q = H_0 ... H_{k-1} [I_k; 0], built column by column (column-major).
    let mut qt = DenseMatrix::zeros(k, m);
    for j in 0..k {
        let qj = qt.row_mut(j);
        qj[j] = 1.0;
        for (i, (v, beta)) in reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let seg = &mut qj[i..];
            let w = beta * dot(v, seg);
            for (q, vi) in seg.iter_mut().zip(v) {
                *q -= w * vi;
            }
        }
    }
    PivotedQr { q: qt.transpose(), r, residual }
}
