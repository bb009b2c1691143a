use alloc::vec::Vec;

use super::DenseMatrix;
use crate::error::{Error, Result};

/// A pivot smaller than this fraction of the matrix scale is treated as zero.
pub const PIVOT_RELATIVE_THRESHOLD: f64 = 1e-14;

/// LU factorization with partial (row) pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    /// Packed factors: strict lower part holds `L` (unit diagonal), the rest `U`.
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &DenseMatrix) -> Result<Lu> {
        if !a.is_square() {
            return Err(Error::shape("square matrix", alloc::format!("{}x{}", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut scale = a.norm_max();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= PIVOT_RELATIVE_THRESHOLD * scale || pivot == 0.0 {
                return Err(Error::SingularMatrix { step: k, pivot, scale });
            }
            scale = scale.max(pivot);
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let d = lu.as_mut_slice();
                    d.swap(p * n + j, k * n + j);
                }
            }
            let inv = 1.0 / lu[(k, k)];
            let (top, bottom) = lu.as_mut_slice().split_at_mut((k + 1) * n);
            let pivot_row = &top[k * n..(k + 1) * n];
            for row in bottom.chunks_exact_mut(n) {
                let l = row[k] * inv;
                row[k] = l;
                if l != 0.0 {
                    for (x, u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *x -= l * u;
                    }
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    /// Solves `A X = B` in place for a right-hand side block.
    pub fn solve_in_place(&self, b: &mut DenseMatrix) {
        assert_eq!(b.rows(), self.n, "lu solve: row mismatch");
        let n = self.n;
        let r = b.cols();
        let src = b.clone();
        for (i, &p) in self.perm.iter().enumerate() {
            b.row_mut(i).copy_from_slice(src.row(p));
        }
        let data = b.as_mut_slice();
        // forward substitution with unit lower triangle
        for i in 0..n {
            let (done, rest) = data.split_at_mut(i * r);
            let bi = &mut rest[..r];
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l != 0.0 {
                    for (x, y) in bi.iter_mut().zip(&done[k * r..(k + 1) * r]) {
                        *x -= l * y;
                    }
                }
            }
        }
        // back substitution
        for i in (0..n).rev() {
            let (head, tail) = data.split_at_mut((i + 1) * r);
            let bi = &mut head[i * r..];
            for k in i + 1..n {
                let u = self.lu[(i, k)];
                if u != 0.0 {
                    for (x, y) in bi.iter_mut().zip(&tail[(k - i - 1) * r..(k - i) * r]) {
                        *x -= u * y;
                    }
                }
            }
            let d = 1.0 / self.lu[(i, i)];
            bi.iter_mut().for_each(|x| *x *= d);
        }
    }

    pub fn inverse(&self) -> DenseMatrix {
        let mut x = DenseMatrix::identity(self.n);
        self.solve_in_place(&mut x);
        x
    }
}

/// Inverse of a square, numerically nonsingular matrix.
pub fn dense_invert(m: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(Lu::factor(m)?.inverse())
}

/// Solves `A x = b` for a single right-hand side.
pub fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let lu = Lu::factor(a)?;
    let mut rhs = DenseMatrix::from_columns(b.len(), &[b.to_vec()]);
    lu.solve_in_place(&mut rhs);
    Ok(rhs.into_vec())
}
