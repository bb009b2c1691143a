use netinv::grid::NetworkSource;
use netinv::linalg::svd;
use netinv::metrics::*;
use netinv::solver::{boundary_operator_with, Method};
use netinv::*;

/// Gaussian elimination with partial pivoting, all columns of `b` at once.
fn gauss_solve(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    let k = b.cols();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).chain((0..k).map(|j| b[(i, j)])).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for j in c..n + k {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    let mut x = DenseMatrix::zeros(n, k);
    for j in 0..k {
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|t| m[i][t] * x[(t, j)]).sum();
            x[(i, j)] = (m[i][n + j] - s) / m[i][i];
        }
    }
    x
}

/// Outer-ring block of the inverse of the full row-major matrix.
fn brute_boundary_operator(g: &GridNetwork) -> DenseMatrix {
    let m = g.m();
    let p = spiral_partition(m).unwrap();
    let outer: Vec<usize> = p.ring_range(p.ring_count()).map(|s| p.order()[s]).collect();
    let mut rhs = DenseMatrix::zeros(m * m, outer.len());
    for (c, &i) in outer.iter().enumerate() {
        rhs[(i, c)] = 1.0;
    }
    let x = gauss_solve(&g.dense_matrix(), &rhs);
    DenseMatrix::from_fn(outer.len(), outer.len(), |i, j| x[(outer[i], j)])
}

fn hss_operator(g: &GridNetwork, eps: f64, leaf_max: usize) -> BoundaryOperator {
    let p = spiral_partition(g.m()).unwrap();
    boundary_operator(&mut NetworkSource::new(g, &p), Tolerance::Absolute(eps), leaf_max).unwrap()
}

#[test]
fn cg_on_identity_needs_one_step() {
    let a = DenseMatrix::identity(7).scaled(2.0);
    let sol = cg_reference(&a, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], 1e-12, 10).unwrap();
    assert!(sol.iterations <= 2);
    assert!((sol.x[3] - 2.0).abs() < 1e-14);
}

#[test]
fn cg_matches_dense_solve() {
    let g = build_grid(10, 4, 1.0, 2.0).unwrap().with_random_boundary(1, 0.0, 1.0).unwrap();
    let b = g.boundary_load();
    let sol = cg_reference(&g, &b, 1e-12, cg_iteration_cap(10)).unwrap();
    let direct = gauss_solve(&g.dense_matrix(), &DenseMatrix::from_row_major(100, 1, b).unwrap());
    let err: f64 = sol.x.iter().zip(direct.as_slice()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = direct.as_slice().iter().map(|b| b * b).sum::<f64>().sqrt();
    assert!(err / norm < 1e-10);
    assert_eq!(sol.residuals.len(), sol.iterations + 1);
}

#[test]
fn cg_energy_error_decreases() {
    // CG minimizes the A-norm of the error over growing Krylov spaces.
    let g = build_grid(12, 2, 1.0, 2.0).unwrap().with_random_boundary(3, -1.0, 1.0).unwrap();
    let b = g.boundary_load();
    let a = g.dense_matrix();
    let exact = gauss_solve(&a, &DenseMatrix::from_row_major(144, 1, b.clone()).unwrap());
    let energy = |x: &[f64]| {
        let e: Vec<f64> = x.iter().zip(exact.as_slice()).map(|(a, b)| a - b).collect();
        e.iter().zip(a.matvec(&e)).map(|(u, v)| u * v).sum::<f64>()
    };
    let mut last = f64::INFINITY;
    for it in 1..60 {
        let sol = cg_run(&g, &b, 0.0, it).unwrap();
        assert_eq!(sol.iterations, it);
        let e = energy(&sol.x);
        assert!(e <= last * (1.0 + 1e-10), "iteration {it}");
        last = e;
    }
}

#[test]
fn cg_reports_no_convergence() {
    let g = build_grid(20, 0, 1.0, 2.0).unwrap().with_constant_boundary(1.0).unwrap();
    let err = cg_reference(&g, &g.boundary_load(), 1e-12, 3).unwrap_err();
    assert!(matches!(err, Error::NoConvergence { iterations: 3, .. }));
}

#[test]
fn exact_operator_has_zero_error() {
    let g = build_grid(10, 1, 1.0, 2.0).unwrap();
    let exact = dense_boundary_operator(&g).unwrap();
    let e = compute_errors(&exact, &g, 1, OracleCaps::default()).unwrap();
    assert_eq!(e.e1, Some(0.0));
    assert_eq!(e.e2, Some(0.0));
    assert!(e.e3.unwrap() < 1e-12 && e.e4.unwrap() < 1e-12);
}

#[test]
fn dense_oracle_matches_brute_force() {
    let g = build_grid(8, 6, 1.0, 2.0).unwrap();
    let exact = dense_boundary_operator(&g).unwrap().to_dense().unwrap();
    assert!(exact.sub(&brute_boundary_operator(&g)).norm_max() < 1e-12);
}

#[test]
fn metrics_match_scripted_computation() {
    let g = build_grid(10, 3, 1.0, 2.0).unwrap();
    let fast = hss_operator(&g, 1e-4, 2);
    let e = compute_errors(&fast, &g, 5, OracleCaps::default()).unwrap();
    let diff = fast.to_dense().unwrap().sub(&brute_boundary_operator(&g));
    let e1 = diff.norm_max();
    let e2 = svd(&diff).s[0];
    assert!(e1 > 0.0);
    assert!((e.e1.unwrap() - e1).abs() <= 1e-10 * e1.max(1e-12) + 1e-13);
    // power iteration approaches the norm from below and stops on a 1e-3 step
    assert!(e.e2.unwrap() <= e2 * (1.0 + 1e-12) && e.e2.unwrap() >= 0.99 * e2, "{} vs {e2}", e.e2.unwrap());
    // max entry never exceeds the spectral norm, which is at most n times the max entry
    assert!(e.e1.unwrap() <= e.e2.unwrap() * (1.0 + 1e-12));
    assert!(e.e2.unwrap() <= 36.0 * e.e1.unwrap());
}

#[test]
fn e4_is_e3_along_first_axis() {
    let g = build_grid(12, 2, 1.0, 2.0).unwrap();
    let fast = hss_operator(&g, 1e-5, 4);
    let e = compute_errors(&fast, &g, 9, OracleCaps::default()).unwrap();
    let mut e1 = vec![0.0; fast.size()];
    e1[0] = 1.0;
    let reference = cg_boundary_response(&g, &e1).unwrap();
    let got = fast.matvec(&e1).unwrap();
    let manual: f64 = got.iter().zip(&reference).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    assert!((manual - e.e4.unwrap()).abs() <= 1e-14);
}

#[test]
fn oracles_respect_caps() {
    let g = build_grid(12, 2, 1.0, 2.0).unwrap();
    let fast = hss_operator(&g, 1e-7, 4);
    let none = compute_errors(&fast, &g, 1, OracleCaps { dense: 10, cg: 10 }).unwrap();
    assert_eq!(none, ErrorMetrics::default());
    let cg_only = compute_errors(&fast, &g, 1, OracleCaps { dense: 10, cg: 12 }).unwrap();
    assert!(cg_only.e1.is_none() && cg_only.e3.is_some());
}

#[test]
fn metrics_are_deterministic() {
    let g = build_grid(16, 8, 1.0, 2.0).unwrap();
    let a = compute_errors(&hss_operator(&g, 1e-7, 4), &g, 3, OracleCaps::default()).unwrap();
    let b = compute_errors(&hss_operator(&g, 1e-7, 4), &g, 3, OracleCaps::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn dense_method_boundary_operator_via_observerless_call() {
    let g = build_grid(6, 0, 1.0, 2.0).unwrap();
    let p = spiral_partition(6).unwrap();
    let (op, summary) = boundary_operator_with(&mut NetworkSource::new(&g, &p), Method::Dense, &mut ()).unwrap();
    assert_eq!(op.size(), 20);
    assert_eq!(summary.steps.len(), 3);
}
