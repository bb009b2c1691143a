//! Self-checks of an installed build against dense and iterative oracles.

use netinv::grid::NetworkSource;
use netinv::linalg::dense_solve;
use netinv::metrics::{compute_errors, dense_boundary_operator, OracleCaps};
use netinv::solver::{back_substitute, boundary_operator, sweep, Method, SweepMode};
use netinv::{assemble_blocks, build_grid, solve_network, spiral_partition, GridNetwork, Tolerance};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, run: impl FnOnce() -> Result<(bool, String), CliError>) -> Check {
    let name = name.into();
    match run() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: e.to_string() },
    }
}

fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let n: f64 = b.iter().map(|y| y * y).sum();
    (d / n).sqrt()
}

fn network(m: usize, seed: u64) -> Result<GridNetwork, CliError> {
    Ok(build_grid(m, seed, 1.0, 2.0)?.with_random_boundary(seed, -1.0, 1.0)?)
}

fn direct_solve(g: &GridNetwork) -> Result<Vec<f64>, CliError> {
    Ok(dense_solve(&g.dense_matrix(), &g.boundary_load())?)
}

fn structure() -> Check {
    check("ring structure", || {
        let p = spiral_partition(12)?;
        let sizes_ok = (1..=6).all(|k| p.ring_size(k) == 8 * k - 4);
        let small = spiral_partition(4)?;
        let j_ok = small.ring_range(1) == (0..4) && small.ring_range(2) == (4..16);
        let g = build_grid(6, 0, 1.0, 1.0)?;
        let a = g.dense_matrix();
        let center = 2 * 6 + 2;
        let row: Vec<f64> = (0..36).map(|j| a[(center, j)]).filter(|v| *v != 0.0).collect();
        let stencil_ok = row.iter().filter(|&&v| v == 4.0).count() == 1 && row.iter().filter(|&&v| v == -1.0).count() == 4;
        Ok((sizes_ok && j_ok && stencil_ok, format!("sizes {sizes_ok}, index sets {j_ok}, stencil {stencil_ok}")))
    })
}

fn dense_exactness(sizes: &[usize]) -> Check {
    check("dense sweep matches direct solve", || {
        let mut worst: f64 = 0.0;
        for &m in sizes {
            for seed in 1..=3 {
                let g = network(m, seed)?;
                let x = solve_network(&g, Method::Dense)?.row_major;
                worst = worst.max(rel_l2(&x, &direct_solve(&g)?));
            }
        }
        Ok((worst <= 1e-10, format!("max relative error {worst:.2e} (limit 1e-10)")))
    })
}

fn oracle_equivalence(sizes: &[usize]) -> Check {
    check("fast sweep matches dense sweep", || {
        let (mut op_err, mut sol_err): (f64, f64) = (0.0, 0.0);
        for &m in sizes {
            for seed in 1..=3 {
                let g = network(m, seed)?;
                let p = spiral_partition(m)?;
                let b = assemble_blocks(&g, &p)?;
                let fast = Method::Hss { tol: Tolerance::Absolute(1e-10), leaf_max: 2 };
                let d = sweep(&mut b.source(), Some(b.rhs()), Method::Dense, SweepMode::Full, &mut ())?;
                let h = sweep(&mut b.source(), Some(b.rhs()), fast, SweepMode::Full, &mut ())?;
                let diff = d.current_inverse().to_dense()?.sub(&h.current_inverse().to_dense()?).norm_max();
                op_err = op_err.max(diff);
                sol_err = sol_err.max(rel_l2(&back_substitute(&h)?, &back_substitute(&d)?));
            }
        }
        let ok = op_err <= 1e-8 && sol_err <= 1e-8;
        Ok((ok, format!("operator {op_err:.2e}, solution {sol_err:.2e} (limits 1e-8)")))
    })
}

fn symmetry(m: usize) -> Check {
    check(format!("boundary operator symmetric (m = {m})"), || {
        let g = build_grid(m, 1, 1.0, 2.0)?;
        let p = spiral_partition(m)?;
        let op = boundary_operator(&mut NetworkSource::new(&g, &p), Tolerance::Absolute(1e-7), 8)?;
        let d = op.to_dense()?;
        let asym = d.sub(&d.transpose()).norm_max() / d.norm_max();
        Ok((asym <= 1e-6, format!("relative asymmetry {asym:.2e} (limit 1e-6)")))
    })
}

fn schur_errors(m: usize, leaf_max: usize) -> Check {
    check(format!("e1/e2 against dense sweep (m = {m})"), || {
        let g = build_grid(m, 1, 1.0, 2.0)?;
        let p = spiral_partition(m)?;
        let op = boundary_operator(&mut NetworkSource::new(&g, &p), Tolerance::Absolute(1e-7), leaf_max)?;
        let e = compute_errors(&op, &g, 1, OracleCaps { dense: m, cg: 0 })?;
        let (e1, e2) = (e.e1.unwrap_or(f64::NAN), e.e2.unwrap_or(f64::NAN));
        Ok((e1 <= 1e-6 && e2 <= 1e-5, format!("e1 {e1:.2e} (limit 1e-6), e2 {e2:.2e} (limit 1e-5)")))
    })
}

fn iterative_errors(m: usize) -> Check {
    check(format!("e3/e4 against CG (m = {m})"), || {
        let g = build_grid(m, 1, 1.0, 2.0)?;
        let p = spiral_partition(m)?;
        let op = boundary_operator(&mut NetworkSource::new(&g, &p), Tolerance::Absolute(1e-7), 64)?;
        let e = compute_errors(&op, &g, 1, OracleCaps { dense: 0, cg: m })?;
        let (e3, e4) = (e.e3.unwrap_or(f64::NAN), e.e4.unwrap_or(f64::NAN));
        Ok((e3 <= 1e-6 && e4 <= 1e-6, format!("e3 {e3:.2e}, e4 {e4:.2e} (limits 1e-6)")))
    })
}

fn dense_oracle_consistency() -> Check {
    check("dense oracle matches direct solve", || {
        let g = build_grid(8, 2, 1.0, 2.0)?;
        let op = dense_boundary_operator(&g)?;
        let p = spiral_partition(8)?;
        let outer: Vec<usize> = p.ring_range(p.ring_count()).collect();
        let g = g.with_random_boundary(5, 0.0, 1.0)?;
        let full = direct_solve(&g)?;
        let load: Vec<f64> = outer.iter().map(|&s| g.boundary_load()[p.order()[s]]).collect();
        let got = op.matvec(&load)?;
        let want: Vec<f64> = outer.iter().map(|&s| full[p.order()[s]]).collect();
        let err = rel_l2(&got, &want);
        Ok((err <= 1e-10, format!("relative error {err:.2e} (limit 1e-10)")))
    })
}

pub fn run_verify(level: Level) -> Vec<Check> {
    let mut out = vec![
        structure(),
        dense_exactness(&[2, 4, 6, 8, 10]),
        oracle_equivalence(&[2, 4, 6, 8, 10]),
        dense_oracle_consistency(),
        symmetry(20),
        schur_errors(20, 8),
    ];
    if level == Level::Full {
        out.push(schur_errors(50, 64));
        out.push(schur_errors(100, 64));
        out.push(iterative_errors(100));
        out.push(iterative_errors(200));
    }
    out
}
