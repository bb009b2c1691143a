use netinv::grid::{assemble_blocks, build_grid, spiral_partition};
use netinv::linalg::{lr_add, lr_recompress, power_norm, svd, truncated_factor, truncated_factor_with, FactorMethod};
use netinv::rng::SeededRng;
use netinv::*;
use proptest::prelude::*;

fn random(rows: usize, cols: usize, rng: &mut SeededRng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.normal())
}

/// Orthonormal columns from the SVD of a random matrix.
fn orthonormal(rows: usize, cols: usize, rng: &mut SeededRng) -> DenseMatrix {
    svd(&random(rows, cols, rng)).u
}

fn with_spectrum(rows: usize, cols: usize, sigma: &[f64], seed: u64) -> DenseMatrix {
    let mut rng = SeededRng::new(seed, 21);
    let k = sigma.len();
    let u = orthonormal(rows, k, &mut rng);
    let v = orthonormal(cols, k, &mut rng);
    let us = DenseMatrix::from_fn(rows, k, |i, j| u[(i, j)] * sigma[j]);
    us.matmul_tr(&v)
}

fn spectral(a: &DenseMatrix) -> f64 {
    svd(a).s.first().copied().unwrap_or(0.0)
}

/// Column-by-column solves by elimination without forming an inverse.
fn column_solves(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let mut out = DenseMatrix::zeros(n, n);
    for c in 0..n {
        let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).chain([if i == c { 1.0 } else { 0.0 }]).collect()).collect();
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| m[x][k].abs().total_cmp(&m[y][k].abs())).unwrap();
            m.swap(k, p);
            for r in 0..n {
                if r != k {
                    let f = m[r][k] / m[k][k];
                    for j in k..=n {
                        m[r][j] -= f * m[k][j];
                    }
                }
            }
        }
        for i in 0..n {
            out[(i, c)] = m[i][n] / m[i][i];
        }
    }
    out
}

#[test]
fn schur_block_inverse_matches_column_solves() {
    // ring 3 Schur complement of a 6 x 6 grid: 20 x 20
    let g = build_grid(6, 4, 1.0, 2.0).unwrap();
    let p = spiral_partition(6).unwrap();
    let a = assemble_blocks(&g, &p).unwrap().to_dense();
    let inner = column_solves(&a.submatrix(0..16, 0..16));
    let schur = a.submatrix(16..36, 16..36).sub(&a.submatrix(16..36, 0..16).matmul(&inner).matmul(&a.submatrix(0..16, 16..36)));
    let inv = dense_invert(&schur).unwrap();
    assert!(inv.sub(&column_solves(&schur)).norm_max() < 1e-12);
    let mut res = schur.matmul(&inv);
    for i in 0..20 {
        res[(i, i)] -= 1.0;
    }
    assert!(res.norm_max() <= 1e-12 * schur.norm_max() * 20.0);
}

#[test]
fn recompress_shared_column_space() {
    let mut rng = SeededRng::new(3, 22);
    let base = random(30, 2, &mut rng);
    let mk = |rng: &mut SeededRng| {
        let left = DenseMatrix::hcat(&base, &random(30, 1, rng));
        LowRankFactor::new(left, random(25, 3, rng)).unwrap()
    };
    let (a, b) = (mk(&mut rng), mk(&mut rng));
    let sum = lr_add(&a, &b, Tolerance::Absolute(1e-10)).unwrap();
    let dense = a.to_dense();
    let mut dense = dense;
    dense.add_assign(&b.to_dense());
    let oracle = svd(&dense).s.iter().filter(|&&s| s > 1e-10).count();
    assert_eq!(oracle, 4);
    assert_eq!(sum.rank(), 4);
    assert!(sum.to_dense().sub(&dense).norm_max() < 1e-10);
    assert_eq!(lr_recompress(&LowRankFactor::zero(5, 4), Tolerance::default()).rank(), 0);
}

#[test]
fn add_two_rank_two_factors() {
    let mut rng = SeededRng::new(8, 23);
    let a = LowRankFactor::new(random(40, 2, &mut rng), random(35, 2, &mut rng)).unwrap();
    let b = LowRankFactor::new(random(40, 2, &mut rng), random(35, 2, &mut rng)).unwrap();
    let eps = 1e-7;
    let sum = lr_add(&a, &b, Tolerance::Absolute(eps)).unwrap();
    let mut dense = a.to_dense();
    dense.add_assign(&b.to_dense());
    assert!(sum.to_dense().sub(&dense).norm_max() <= eps);
    assert!(lr_add(&a, &LowRankFactor::zero(30, 35), Tolerance::default()).is_err());
}

fn decaying(n: usize) -> Vec<f64> {
    (0..n).map(|i| 10f64.powf(-(i as f64) / 2.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn truncation_error_within_eps(rows in 1usize..40, cols in 1usize..40, seed: u64, exp in 2i32..12, svd_path: bool) {
        let k = rows.min(cols);
        let a = with_spectrum(rows, cols, &decaying(k), seed);
        let eps = 10f64.powi(-exp);
        let method = if svd_path { FactorMethod::Svd } else { FactorMethod::PivotedQr };
        let f = truncated_factor_with(&a, Tolerance::Absolute(eps), method);
        let diff = f.to_dense().sub(&a);
        let err = power_norm(rows, cols, |x| diff.matvec(x), |x| diff.matvec_tr(x), 500, 1e-12);
        prop_assert!(err <= eps * (1.0 + 1e-6), "error {err:e} eps {eps:e}");
        prop_assert!(f.rank() <= k);
        // minimal: dropping one more term would break the bound
        let oracle = svd(&a).s.iter().filter(|&&s| s > eps).count();
        prop_assert!(f.rank() <= oracle + 1 && f.rank() + 1 >= oracle, "rank {} vs {oracle}", f.rank());
    }

    #[test]
    fn exact_rank_recovered(rows in 2usize..40, cols in 2usize..40, k in 0usize..6, seed: u64) {
        let k = k.min(rows.min(cols));
        let sigma: Vec<f64> = (0..k).map(|i| 1.0 + i as f64).collect();
        let a = with_spectrum(rows, cols, &sigma, seed);
        let f = truncated_factor(&a, Tolerance::Absolute(1e-7));
        prop_assert_eq!(f.rank(), k);
        prop_assert!(spectral(&f.to_dense().sub(&a)) <= 1e-7);
    }

    #[test]
    fn inverse_is_involution(n in 1usize..40, seed: u64) {
        let mut rng = SeededRng::new(seed, 24);
        let mut a = DenseMatrix::from_fn(n, n, |_, _| rng.uniform_in(-1.0, 1.0));
        for i in 0..n {
            a[(i, i)] += n as f64;
        }
        let back = dense_invert(&dense_invert(&a).unwrap()).unwrap();
        prop_assert!(back.sub(&a).norm_fro() <= 1e-10 * a.norm_fro());
    }
}
