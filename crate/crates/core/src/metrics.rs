//! Reference solvers and error metrics for the boundary operator.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{spiral_partition, BlockSystem, GridNetwork, NetworkSource};
use crate::linalg::{dot, norm2, power_norm, DenseMatrix};
use crate::rng::{SeededRng, STREAM_PROBE};
use crate::solver::{boundary_operator_with, BoundaryOperator, Method};

/// A square matrix known only through its product.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for GridNetwork {
    fn dim(&self) -> usize {
        self.unknowns()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        GridNetwork::apply(self, x, y)
    }
}

impl LinearOperator for BlockSystem {
    fn dim(&self) -> usize {
        self.m() * self.m()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        BlockSystem::apply(self, x, y)
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.matvec(x));
    }
}

/// Output of [`cg_reference`].
#[derive(Clone, Debug, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual `|b - A x| / |b|` after each iteration, starting
    /// with the initial guess.
    pub residuals: Vec<f64>,
}

pub const CG_TOLERANCE: f64 = 1e-12;

/// Iteration cap used for an `m x m` grid.
pub fn cg_iteration_cap(m: usize) -> usize {
    20 * m.max(1)
}

/// Conjugate gradients from a zero start until the relative residual drops
/// to `tol`.
pub fn cg_reference<A: LinearOperator + ?Sized>(a: &A, b: &[f64], tol: f64, max_iter: usize) -> Result<CgSolution> {
    let sol = cg_run(a, b, tol, max_iter)?;
    match sol.residuals.last() {
        Some(&res) if res > tol => Err(Error::NoConvergence { iterations: sol.iterations, residual: res }),
        _ => Ok(sol),
    }
}

/// Conjugate gradients that stops after `max_iter` steps or at relative
/// residual `tol`, returning the last iterate either way.
pub fn cg_run<A: LinearOperator + ?Sized>(a: &A, b: &[f64], tol: f64, max_iter: usize) -> Result<CgSolution> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::shape("right-hand side of the operator size", b.len()));
    }
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgSolution { x, iterations: 0, residuals: vec![0.0] });
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut residuals = vec![1.0];
    for it in 1..=max_iter {
        a.apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let rel = libm::sqrt(rr_new) / bnorm;
        residuals.push(rel);
        if rel <= tol {
            return Ok(CgSolution { x, iterations: it, residuals });
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Ok(CgSolution { x, iterations: max_iter, residuals })
}

/// The four error measures of a computed boundary operator. A measure is
/// `None` when its oracle was not run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorMetrics {
    /// Largest entry error against the dense sweep.
    pub e1: Option<f64>,
    /// Spectral-norm error against the dense sweep.
    pub e2: Option<f64>,
    /// `l2` error of the operator applied to a random unit load, against CG.
    pub e3: Option<f64>,
    /// Same with the first unit vector as load.
    pub e4: Option<f64>,
}

/// Largest grid sides for which each oracle runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    pub dense: usize,
    pub cg: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self { dense: 200, cg: 700 }
    }
}

pub const POWER_ITERATIONS: usize = 50;
pub const POWER_TOLERANCE: f64 = 1e-3;

/// Exact boundary operator from the dense sweep.
pub fn dense_boundary_operator(g: &GridNetwork) -> Result<BoundaryOperator> {
    let p = spiral_partition(g.m())?;
    boundary_operator_with(&mut NetworkSource::new(g, &p), Method::Dense, &mut ()).map(|(op, _)| op)
}

/// `e1` and `e2` of `fast` against an exact operator.
pub fn dense_errors(fast: &BoundaryOperator, exact: &DenseMatrix) -> Result<(f64, f64)> {
    let n = fast.size();
    if exact.rows() != n || exact.cols() != n {
        return Err(Error::shape("exact operator of the same size", exact.rows()));
    }
    let diff = fast.to_dense()?.sub(exact);
    let e1 = diff.norm_max();
    let e2 = power_norm(n, n, |x| diff.matvec(x), |x| diff.matvec_tr(x), POWER_ITERATIONS, POWER_TOLERANCE);
    Ok((e1, e2))
}

/// Outer-ring potentials for an outer-ring load, by CG on the full grid.
pub fn cg_boundary_response(g: &GridNetwork, load: &[f64]) -> Result<Vec<f64>> {
    let m = g.m();
    let p = spiral_partition(m)?;
    let k = p.ring_count();
    let range = p.ring_range(k);
    if load.len() != range.len() {
        return Err(Error::shape("load on the outer ring", load.len()));
    }
    let mut b = vec![0.0; m * m];
    for (s, v) in range.clone().zip(load) {
        b[p.order()[s]] = *v;
    }
    let sol = cg_reference(g, &b, CG_TOLERANCE, cg_iteration_cap(m))?;
    Ok(range.map(|s| sol.x[p.order()[s]]).collect())
}

/// `e3` and `e4` of `fast`; the load for `e3` is drawn from the probe stream of `seed`.
pub fn cg_errors(fast: &BoundaryOperator, g: &GridNetwork, seed: u64) -> Result<(f64, f64)> {
    let n = fast.size();
    let r = SeededRng::new(seed, STREAM_PROBE).unit_vector(n);
    let mut e = vec![0.0; n];
    e[0] = 1.0;
    let mut out = [0.0; 2];
    for (slot, load) in out.iter_mut().zip([r, e]) {
        let reference = cg_boundary_response(g, &load)?;
        let got = fast.matvec(&load)?;
        let d: Vec<f64> = got.iter().zip(&reference).map(|(a, b)| a - b).collect();
        *slot = norm2(&d);
    }
    Ok((out[0], out[1]))
}

/// All metrics whose oracles fit under `caps`.
pub fn compute_errors(fast: &BoundaryOperator, g: &GridNetwork, seed: u64, caps: OracleCaps) -> Result<ErrorMetrics> {
    let m = g.m();
    if fast.m() != m {
        return Err(Error::shape("operator for the same grid", fast.m()));
    }
    let mut out = ErrorMetrics::default();
    if m <= caps.dense {
        let exact = dense_boundary_operator(g)?.to_dense()?;
        let (e1, e2) = dense_errors(fast, &exact)?;
        out.e1 = Some(e1);
        out.e2 = Some(e2);
    }
    if m <= caps.cg {
        let (e3, e4) = cg_errors(fast, g, seed)?;
        out.e3 = Some(e3);
        out.e4 = Some(e4);
    }
    Ok(out)
}
