use super::update::update_node;
use super::{HssMatrix, Node};
use crate::error::Result;
use crate::linalg::{dense_invert, lr_recompress, LowRankFactor, Tolerance};

/// Recursive 2x2 block inversion. With `A12 = U12 V12^T`, `A21 = U21 V21^T`:
///
/// ```text
/// X22 = inv(A22)
/// Y11 = A11 - U12 (V12^T X22 U21) V21^T
/// X11 = inv(Y11)
/// B   = [ X11                 -X11 A12 X22             ]
///       [ -X22 A21 X11        X22 + X22 A21 X11 A12 X22 ]
/// ```
///
/// Every product involving an off-diagonal block reduces to applying an HSS
/// matrix to the thin factors, and both diagonal updates are low-rank.
fn invert_node(node: &Node, tol: Tolerance) -> Result<Node> {
    let b = match node {
        Node::Leaf(a) => return Ok(Node::Leaf(dense_invert(a)?)),
        Node::Branch(b) => b,
    };
    let (u12, v12) = (b.upper.left(), b.upper.right());
    let (u21, v21) = (b.lower.left(), b.lower.right());

    let x22 = invert_node(&b.hi, tol)?;

    // X22 U21, reused for B21 and B22.
    let w = x22.apply(u21);
    let core = v12.tr_matmul(&w);
    let schur_update = LowRankFactor::new(u12.matmul(&core).scaled(-1.0), v21.clone())?;
    let y11 = update_node(&b.lo, schur_update.left(), schur_update.right(), tol);
    let x11 = invert_node(&y11, tol)?;

    // X11 U12 and X22^T V12: A12 X22 = U12 (X22^T V12)^T.
    let p = x11.apply(u12);
    let q = x22.apply_tr(v12);
    // A21 X11 = U21 (X11^T V21)^T.
    let r = x11.apply_tr(v21);

    let b12 = lr_recompress(&LowRankFactor::new(p.scaled(-1.0), q.clone())?, tol);
    let b21 = lr_recompress(&LowRankFactor::new(w.scaled(-1.0), r)?, tol);
    // X22 A21 X11 A12 X22 = W (V21^T P) Q^T
    let inner = v21.tr_matmul(&p);
    let b22 = update_node(&x22, &w.matmul(&inner), &q, tol);

    Ok(Node::branch(x11, b22, b12, b21))
}

impl HssMatrix {
    /// Approximate inverse, computed by recursive block elimination on the
    /// tessellation tree. Off-diagonal blocks of the result are recompressed
    /// to `tol`.
    pub fn invert(&self, tol: Tolerance) -> Result<HssMatrix> {
        Ok(HssMatrix::from_root(invert_node(self.root(), tol)?, self.leaf_max(), tol))
    }
}
