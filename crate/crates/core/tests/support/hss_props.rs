//! Randomized HSS checks shared by the property tests and the acceptance suite.

use netinv::hss::BranchInfo;
use netinv::linalg::{power_norm, svd};
use netinv::rng::SeededRng;
use netinv::{HssMatrix, LowRankFactor, SparseStencil, Tolerance};
use netinv::DenseMatrix;

pub const EPS: f64 = 1e-7;
pub const TOL: Tolerance = Tolerance::Absolute(EPS);

#[derive(Clone, Copy, Debug)]
pub struct Case {
    pub n: usize,
    pub leaf_max: usize,
    pub seed: u64,
}

/// Smooth kernel on sorted random points plus a random diagonal, so the
/// off-diagonal blocks have decaying singular values.
pub fn kernel_matrix(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = SeededRng::new(seed, 11);
    let mut x: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    x.sort_by(f64::total_cmp);
    let d: Vec<f64> = (0..n).map(|_| rng.uniform_in(1.0, 2.0)).collect();
    DenseMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { 1.0 / (1.0 + 8.0 * (x[i] - x[j]).abs()) })
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut SeededRng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.uniform_in(-1.0, 1.0))
}

fn spectral_norm(a: &DenseMatrix) -> f64 {
    if a.rows() <= 160 {
        svd(a).s.first().copied().unwrap_or(0.0)
    } else {
        power_norm(a.rows(), a.cols(), |x| a.matvec(x), |x| a.matvec_tr(x), 200, 1e-9)
    }
}

fn ranks(b: &[BranchInfo]) -> Vec<(usize, usize, usize, usize)> {
    b.iter().map(|b| (b.start, b.lo_size, b.upper_rank, b.lower_rank)).collect()
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Compression error is at most `eps` per tree level.
pub fn round_trip(c: Case) -> Result<(), String> {
    let m = kernel_matrix(c.n, c.seed);
    let h = HssMatrix::from_dense(&m, c.leaf_max, TOL).map_err(|e| e.to_string())?;
    let st = h.stats();
    check(st.max_leaf <= c.leaf_max, || format!("leaf {} above {}", st.max_leaf, c.leaf_max))?;
    for b in h.branches() {
        let side = b.lo_size.min(b.hi_size);
        check(b.upper_rank <= side && b.lower_rank <= side, || format!("rank above segment side at {b:?}"))?;
        check(b.lo_size + b.hi_size > c.leaf_max, || format!("branch not above leaf size at {b:?}"))?;
    }
    let err = spectral_norm(&h.densify().unwrap().sub(&m));
    let bound = EPS * st.depth.max(1) as f64;
    check(err <= bound, || format!("round trip error {err:e} above {bound:e}"))
}

/// SPD cyclic stencil with weights in [1, 2], shifted by `shift`, plus a
/// positive semidefinite low-rank term.
pub fn spd_operator(c: Case, shift: f64) -> (HssMatrix, DenseMatrix) {
    let mut rng = SeededRng::new(c.seed, 12);
    let n = c.n;
    let w: Vec<f64> = (0..n).map(|_| rng.uniform_in(1.0, 2.0)).collect();
    let main: Vec<f64> = (0..n).map(|i| w[i] + w[(i + n - 1) % n] + shift).collect();
    let off: Vec<f64> = w[..n - 1].iter().map(|x| -x).collect();
    let wrap = if n > 2 { -w[n - 1] } else { 0.0 };
    let main = if n > 2 { main } else { (0..n).map(|i| 2.0 * w[i] + shift).collect() };
    let stencil = SparseStencil::cyclic(main, off, wrap).unwrap();
    let r = (c.seed % 4) as usize;
    let u = random_matrix(n, r, &mut rng).scaled(0.5);
    let h = HssMatrix::zeros(n, c.leaf_max, TOL)
        .add_stencil(&stencil, TOL)
        .unwrap()
        .lowrank_update(&LowRankFactor::new(u.clone(), u.clone()).unwrap(), TOL)
        .unwrap();
    let mut dense = stencil.to_dense();
    dense.add_assign(&u.matmul_tr(&u));
    (h, dense)
}

/// `|inv(H) H - I|_max <= 100 eps / lambda_min`.
pub fn inversion_residual(c: Case) -> Result<(), String> {
    let shift = 0.05 + (c.seed % 20) as f64 / 20.0;
    let (h, dense) = spd_operator(c, shift);
    let inv = h.invert(TOL).map_err(|e| e.to_string())?;
    let mut res = inv.densify().unwrap().matmul(&dense);
    res.sub_assign_identity();
    let err = res.norm_max();
    let bound = 100.0 * EPS / shift;
    check(err <= bound, || format!("inversion residual {err:e} above {bound:e}"))
}

trait SubIdentity {
    fn sub_assign_identity(&mut self);
}

impl SubIdentity for DenseMatrix {
    fn sub_assign_identity(&mut self) {
        for i in 0..self.rows() {
            self[(i, i)] -= 1.0;
        }
    }
}

/// `(H + U V^T) x = H x + U (V^T x)` within `10 eps` for a unit `x`.
pub fn update_consistency(c: Case) -> Result<(), String> {
    let h = HssMatrix::from_dense(&kernel_matrix(c.n, c.seed), c.leaf_max, TOL).unwrap();
    let mut rng = SeededRng::new(c.seed, 13);
    let r = (c.seed % 5) as usize;
    let f = LowRankFactor::new(random_matrix(c.n, r, &mut rng), random_matrix(c.n, r, &mut rng)).unwrap();
    let x = rng.unit_vector(c.n);
    let got = h.lowrank_update(&f, TOL).unwrap().matvec(&x).unwrap();
    let hx = h.matvec(&x).unwrap();
    let fx = f.matvec(&x);
    let err = got.iter().zip(hx.iter().zip(&fx)).map(|(g, (a, b))| (g - a - b).powi(2)).sum::<f64>().sqrt();
    check(err <= 10.0 * EPS, || format!("update mismatch {err:e}"))
}

/// Embedding keeps every rank and places entries exactly; scaling keeps every rank.
pub fn embed_scale_ranks(c: Case) -> Result<(), String> {
    let m = kernel_matrix(c.n, c.seed);
    let h = HssMatrix::from_dense(&m, c.leaf_max, TOL).unwrap();
    let mut rng = SeededRng::new(c.seed, 14);
    let gaps = (c.seed % 9) as usize;
    let target = c.n + gaps;
    // choose which target positions stay empty
    let mut skip = vec![false; target];
    let mut placed = 0;
    while placed < gaps {
        let p = (rng.next_u64() % target as u64) as usize;
        if !skip[p] {
            skip[p] = true;
            placed += 1;
        }
    }
    let map: Vec<usize> = (0..target).filter(|&p| !skip[p]).collect();
    let e = h.embed(target, &map).map_err(|e| e.to_string())?;
    let before: Vec<(usize, usize)> = h.branches().iter().map(|b| (b.upper_rank, b.lower_rank)).collect();
    let after: Vec<(usize, usize)> = e.branches().iter().map(|b| (b.upper_rank, b.lower_rank)).collect();
    check(before.len() == after.len(), || "embed changed the tree".into())?;
    check(before.iter().zip(&after).all(|(a, b)| b.0 <= a.0 && b.1 <= a.1), || "embed raised a rank".into())?;

    let hd = h.densify().unwrap();
    let ed = e.densify().unwrap();
    let mut scatter = DenseMatrix::zeros(target, target);
    for (i, &pi) in map.iter().enumerate() {
        for (j, &pj) in map.iter().enumerate() {
            scatter[(pi, pj)] = hd[(i, j)];
        }
    }
    check(ed == scatter, || "embed is not an exact scatter".into())?;

    let dl: Vec<f64> = (0..c.n).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
    let dr: Vec<f64> = (0..c.n).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
    let s = h.scale(&dl, &dr).unwrap();
    check(ranks(&s.branches()) .iter().zip(ranks(&h.branches())).all(|(a, b)| a.2 <= b.2 && a.3 <= b.3), || {
        "scale raised a rank".into()
    })?;
    let sd = s.densify().unwrap();
    let err = (0..c.n)
        .flat_map(|i| (0..c.n).map(move |j| (i, j)))
        .map(|(i, j)| (sd[(i, j)] - dl[i] * hd[(i, j)] * dr[j]).abs())
        .fold(0.0, f64::max);
    check(err <= 1e-14 * 4.0 * hd.norm_max(), || format!("scale error {err:e}"))
}

/// Adding a stencil to the zero matrix is exact to roundoff; adding it to a
/// compressed matrix is exact up to one recompression per level.
pub fn stencil_addition(c: Case) -> Result<(), String> {
    let mut rng = SeededRng::new(c.seed, 15);
    let n = c.n;
    let main: Vec<f64> = (0..n).map(|_| rng.uniform_in(2.0, 4.0)).collect();
    let off: Vec<f64> = (1..n).map(|_| rng.uniform_in(-1.0, 0.0)).collect();
    let mut s = SparseStencil::cyclic(main, off, if n > 2 { -0.5 } else { 0.0 }).unwrap();
    if n > 3 {
        let mut extra = s.extra().to_vec();
        extra.push((1, n - 2, 3.5));
        s = SparseStencil::new(s.main().to_vec(), s.sub().to_vec(), s.sup().to_vec(), extra).unwrap();
    }
    let sd = s.to_dense();
    let z = HssMatrix::zeros(n, c.leaf_max, TOL).add_stencil(&s, TOL).unwrap().densify().unwrap();
    let err0 = z.sub(&sd).norm_max();
    check(err0 <= 1e-14 * 8.0, || format!("stencil on zero off by {err0:e}"))?;

    let h = HssMatrix::from_dense(&kernel_matrix(n, c.seed), c.leaf_max, TOL).unwrap();
    let depth = h.stats().depth.max(1) as f64;
    let mut expected = h.densify().unwrap();
    expected.add_assign(&sd);
    let err = h.add_stencil(&s, TOL).unwrap().densify().unwrap().sub(&expected).norm_max();
    check(err <= EPS * depth, || format!("stencil addition off by {err:e}"))
}
