//! Ring-by-ring block elimination.
//!
//! The sweep walks the rings from the center outward. At ring `k` it forms
//! the Schur complement `S_k = A_kk - A_{k,k-1} S_{k-1}^{-1} A_{k-1,k}`,
//! inverts it, and folds the loads of the eliminated rings into `b_k`.
//! The inverse of the last complement is the boundary operator.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{boundary_rhs, spiral_partition, GridNetwork, NetworkSource, RingBlocks, RingCoupling, RingSource};
use crate::hss::{HssMatrix, HssStats};
use crate::linalg::{dense_invert, DenseMatrix, LowRankFactor, Tolerance};


#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SweepMode {
    /// Keep every ring inverse and load for back substitution.
    #[default]
    Full,
    /// Keep only the live inverse. The interior must be unloaded.
    BoundaryOnly,
}

/// How ring inverses are represented.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Dense,
    /// Rings larger than `2 * leaf_max` are held as HSS matrices.
    Hss { tol: Tolerance, leaf_max: usize },
}

/// The inverse of one Schur complement.
#[derive(Clone, Debug)]
pub enum RingInverse {
    Dense(DenseMatrix),
    Hss(HssMatrix),
}

impl RingInverse {
    pub fn size(&self) -> usize {
        match self {
            RingInverse::Dense(d) => d.rows(),
            RingInverse::Hss(h) => h.size(),
        }
    }

    /// Stored floating-point values.
    pub fn floats(&self) -> usize {
        match self {
            RingInverse::Dense(d) => d.rows() * d.cols(),
            RingInverse::Hss(h) => h.stats().total_floats,
        }
    }

    pub fn max_rank(&self) -> usize {
        match self {
            RingInverse::Dense(_) => 0,
            RingInverse::Hss(h) => h.stats().max_rank,
        }
    }

    pub fn is_hss(&self) -> bool {
        matches!(self, RingInverse::Hss(_))
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            RingInverse::Dense(d) => {
                if x.len() != d.cols() {
                    return Err(Error::shape("vector of the operator size", x.len()));
                }
                Ok(d.matvec(x))
            }
            RingInverse::Hss(h) => h.matvec(x),
        }
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            RingInverse::Dense(d) => {
                if x.len() != d.rows() {
                    return Err(Error::shape("vector of the operator size", x.len()));
                }
                Ok(d.matvec_tr(x))
            }
            RingInverse::Hss(h) => h.matvec_transpose(x),
        }
    }

    /// Applies the operator to every column of `x`.
    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            RingInverse::Dense(d) => {
                if x.rows() != d.cols() {
                    return Err(Error::shape("block of the operator size", x.rows()));
                }
                Ok(d.matmul(x))
            }
            RingInverse::Hss(h) => h.apply(x),
        }
    }

    pub fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        match self {
            RingInverse::Dense(d) => {
                if x.rows() != d.rows() {
                    return Err(Error::shape("block of the operator size", x.rows()));
                }
                Ok(d.tr_matmul(x))
            }
            RingInverse::Hss(h) => h.apply_transpose(x),
        }
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        match self {
            RingInverse::Dense(d) => Ok(d.clone()),
            RingInverse::Hss(h) => h.densify(),
        }
    }
}

/// What happened at one elimination step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepInfo {
    /// 1-based ring index.
    pub ring: usize,
    pub size: usize,
    pub hss: bool,
    pub retessellated: bool,
    /// Floats held by the new inverse.
    pub floats: usize,
    pub max_rank: usize,
}

/// Hooks around each elimination step, e.g. for timing.
pub trait SweepObserver {
    fn step_started(&mut self, _ring: usize) {}
    fn step_finished(&mut self, _info: &StepInfo) {}
}

impl SweepObserver for () {}

/// Result of a sweep.
#[derive(Clone, Debug)]
pub struct SweepState {
    mode: SweepMode,
    m: usize,
    inverses: Vec<RingInverse>,
    couplings: Vec<Option<RingCoupling>>,
    loads: Vec<Vec<f64>>,
    steps: Vec<StepInfo>,
    peak_floats: usize,
}

impl SweepState {
    pub fn mode(&self) -> SweepMode {
        self.mode
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of rings eliminated.
    pub fn step(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[StepInfo] {
        &self.steps
    }

    /// Inverse of the outermost Schur complement.
    pub fn current_inverse(&self) -> &RingInverse {
        self.inverses.last().expect("a sweep eliminates at least one ring")
    }

    /// Inverse for ring `k` (1-based); full mode only.
    pub fn stored_inverse(&self, k: usize) -> Result<&RingInverse> {
        if self.mode != SweepMode::Full {
            return Err(Error::ModeMismatch);
        }
        self.inverses.get(k.wrapping_sub(1)).ok_or(Error::IndexOutOfRange { row: k, col: 0, size: self.inverses.len() })
    }

    /// Modified loads per ring. Empty if the sweep ran without loads; in
    /// boundary-only mode only the outer ring's load is kept.
    pub fn modified_loads(&self) -> &[Vec<f64>] {
        &self.loads
    }

    /// High-water mark of floats held in ring inverses at any one time.
    pub fn peak_floats(&self) -> usize {
        self.peak_floats
    }

    pub fn into_boundary_operator(mut self) -> BoundaryOperator {
        BoundaryOperator { m: self.m, inverse: self.inverses.pop().expect("a sweep eliminates at least one ring") }
    }
}

fn check_rhs(rhs: &[Vec<f64>], k: usize, size: usize) -> Result<()> {
    match rhs.get(k - 1) {
        Some(b) if b.len() == size => Ok(()),
        Some(b) => Err(Error::shape("load of the ring size", b.len())),
        None => Err(Error::shape("one load per ring", rhs.len())),
    }
}

/// Dense `A_kk - C E X E^T C`.
fn dense_schur(blocks: &RingBlocks, prev: &DenseMatrix) -> DenseMatrix {
    let mut s = blocks.stencil.to_dense();
    if let Some(c) = &blocks.coupling {
        let cond = c.conductivities();
        for (t, qt) in c.inward().iter().enumerate() {
            let Some(qt) = *qt else { continue };
            for (u, qu) in c.inward().iter().enumerate() {
                if let Some(qu) = *qu {
                    s[(t, u)] -= cond[t] * cond[u] * prev[(qt, qu)];
                }
            }
        }
    }
    s
}

/// `E w` where `E` maps inner node `q` to outer position `injection[q]`.
fn inject(injection: &[usize], w: &[f64], outer: usize) -> Vec<f64> {
    let mut out = vec![0.0; outer];
    for (&t, &v) in injection.iter().zip(w) {
        out[t] = v;
    }
    out
}

/// `A_kk - C E X E^T C` as an HSS matrix, plus whether it was rebuilt.
///
/// `E` is the injection `Ei` plus four repeated rows `F` (the outward
/// neighbours of inner corners that `Ei` already covers), so
/// `E X E^T = Ei X Ei^T + F X E^T + Ei X F^T`. The first term is an embed,
/// the other two a rank-8 update.
fn hss_schur(blocks: &RingBlocks, prev: &HssMatrix, tol: Tolerance, leaf_max: usize) -> Result<(HssMatrix, bool)> {
    let s = blocks.stencil.size();
    let c = blocks.coupling.as_ref().ok_or(Error::InvalidGrid("ring without an inner neighbour".into()))?;
    let cond = c.conductivities();
    let split = c.split();
    let neg: Vec<f64> = cond.iter().map(|x| -x).collect();

    let y = prev.embed(s, &split.injection)?.scale(&neg, cond)?;

    let r = split.repeats.len();
    let y = if r > 0 {
        let mut e_b = DenseMatrix::zeros(prev.size(), r);
        for (p, &(_, q)) in split.repeats.iter().enumerate() {
            e_b[(q, p)] = 1.0;
        }
        let xe = prev.apply(&e_b)?;
        let xte = prev.apply_transpose(&e_b)?;
        let mut u = DenseMatrix::zeros(s, 2 * r);
        let mut v = DenseMatrix::zeros(s, 2 * r);
        for (p, &(a, _)) in split.repeats.iter().enumerate() {
            u[(a, p)] = -cond[a];
            v[(a, r + p)] = cond[a];
            let col = inject(&split.injection, &xe.column(p), s);
            let row = c.gather(&xte.column(p));
            for t in 0..s {
                u[(t, r + p)] = -cond[t] * col[t];
                v[(t, p)] = cond[t] * row[t];
            }
        }
        y.lowrank_update(&LowRankFactor::new(u, v)?, tol)?
    } else {
        y
    };

    let y = y.add_stencil(&blocks.stencil, tol)?;
    if y.needs_retessellation() {
        Ok((y.retessellate(leaf_max, tol), true))
    } else {
        Ok((y, false))
    }
}

/// Runs the elimination over the rings produced by `src`.
///
/// `rhs` holds one load vector per ring; without it no loads are tracked.
/// Every ring's blocks are requested exactly once.
pub fn sweep<S: RingSource + ?Sized>(
    src: &mut S,
    rhs: Option<&[Vec<f64>]>,
    method: Method,
    mode: SweepMode,
    observer: &mut dyn SweepObserver,
) -> Result<SweepState> {
    let n = src.ring_count();
    if n == 0 {
        return Err(Error::InvalidGrid("no rings".into()));
    }
    if let Method::Hss { tol, leaf_max } = method {
        if leaf_max == 0 {
            return Err(Error::InvalidParameter("leaf_max must be positive"));
        }
        if !(tol.eps() > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive"));
        }
    }
    if mode == SweepMode::BoundaryOnly {
        if let Some(rhs) = rhs {
            if let Some(k) = rhs.iter().take(n - 1).position(|b| b.iter().any(|&v| v != 0.0)) {
                return Err(Error::InteriorLoad { ring: k + 1 });
            }
        }
    }

    let mut state = SweepState {
        mode,
        m: 2 * n,
        inverses: Vec::new(),
        couplings: Vec::new(),
        loads: Vec::new(),
        steps: Vec::with_capacity(n),
        peak_floats: 0,
    };
    let mut stored_floats = 0usize;

    for k in 1..=n {
        observer.step_started(k);
        let blocks = src.next_ring().ok_or(Error::InvalidGrid("ring source ended early".into()))?;
        let size = blocks.stencil.size();
        if size != 8 * k - 4 {
            return Err(Error::shape("ring of 8k - 4 nodes", size));
        }
        if let Some(rhs) = rhs {
            check_rhs(rhs, k, size)?;
        }

        let prev = state.inverses.last();
        let use_hss = matches!(method, Method::Hss { leaf_max, .. } if size > 2 * leaf_max);
        let mut retessellated = false;
        let inverse = match (prev, method) {
            (Some(RingInverse::Hss(x)), Method::Hss { tol, leaf_max }) => {
                let (schur, rebuilt) = hss_schur(&blocks, x, tol, leaf_max)?;
                retessellated = rebuilt;
                RingInverse::Hss(schur.invert(tol)?)
            }
            (Some(RingInverse::Dense(x)), Method::Hss { tol, leaf_max }) if use_hss => {
                let x = HssMatrix::from_dense(x, leaf_max, tol)?;
                let (schur, rebuilt) = hss_schur(&blocks, &x, tol, leaf_max)?;
                retessellated = rebuilt;
                RingInverse::Hss(schur.invert(tol)?)
            }
            (Some(RingInverse::Dense(x)), _) => RingInverse::Dense(dense_invert(&dense_schur(&blocks, x))?),
            (None, Method::Hss { tol, leaf_max }) if use_hss => {
                let a = HssMatrix::from_dense(&blocks.stencil.to_dense(), leaf_max, tol)?;
                RingInverse::Hss(a.invert(tol)?)
            }
            (None, _) => RingInverse::Dense(dense_invert(&blocks.stencil.to_dense())?),
            (Some(RingInverse::Hss(_)), Method::Dense) => unreachable!("dense sweeps never create HSS inverses"),
        };

        if let Some(rhs) = rhs {
            let mut load = rhs[k - 1].clone();
            if let (Some(c), Some(prev_load), Some(x)) = (&blocks.coupling, state.loads.last(), state.inverses.last()) {
                let xb = x.matvec(prev_load)?;
                for ((l, g), cond) in load.iter_mut().zip(c.gather(&xb)).zip(c.conductivities()) {
                    *l += cond * g;
                }
            }
            if mode == SweepMode::BoundaryOnly {
                state.loads.clear();
            }
            state.loads.push(load);
        }

        let info = StepInfo {
            ring: k,
            size,
            hss: inverse.is_hss(),
            retessellated,
            floats: inverse.floats(),
            max_rank: inverse.max_rank(),
        };
        match mode {
            SweepMode::Full => {
                stored_floats += info.floats;
                state.peak_floats = state.peak_floats.max(stored_floats);
                state.couplings.push(blocks.coupling);
            }
            SweepMode::BoundaryOnly => {
                let live = info.floats + state.inverses.last().map_or(0, RingInverse::floats);
                state.peak_floats = state.peak_floats.max(live);
                state.inverses.clear();
            }
        }
        state.inverses.push(inverse);
        observer.step_finished(&info);
        state.steps.push(info);
    }
    if src.next_ring().is_some() {
        return Err(Error::InvalidGrid("ring source has more rings than it reported".into()));
    }
    Ok(state)
}

/// Exact sweep with dense ring inverses.
pub fn sweep_dense<S: RingSource + ?Sized>(src: &mut S, rhs: Option<&[Vec<f64>]>, mode: SweepMode) -> Result<SweepState> {
    sweep(src, rhs, Method::Dense, mode, &mut ())
}

/// Fast sweep with HSS ring inverses compressed to `tol`.
pub fn sweep_hss<S: RingSource + ?Sized>(
    src: &mut S,
    rhs: Option<&[Vec<f64>]>,
    tol: Tolerance,
    leaf_max: usize,
    mode: SweepMode,
) -> Result<SweepState> {
    sweep(src, rhs, Method::Hss { tol, leaf_max }, mode, &mut ())
}

/// Solution of a full sweep in spiral order.
pub fn back_substitute(state: &SweepState) -> Result<Vec<f64>> {
    if state.mode != SweepMode::Full || state.loads.len() != state.inverses.len() {
        return Err(Error::ModeMismatch);
    }
    let n = state.inverses.len();
    let mut parts: Vec<Vec<f64>> = vec![Vec::new(); n];
    parts[n - 1] = state.inverses[n - 1].matvec(&state.loads[n - 1])?;
    for k in (0..n - 1).rev() {
        let mut w = state.loads[k].clone();
        if let Some(c) = &state.couplings[k + 1] {
            let flux: Vec<f64> = parts[k + 1].iter().zip(c.conductivities()).map(|(x, g)| g * x).collect();
            c.scatter_add(&flux, &mut w);
        }
        parts[k] = state.inverses[k].matvec(&w)?;
    }
    Ok(parts.concat())
}

/// Maps loads on the outer ring to potentials on the outer ring, for a
/// network whose interior is unloaded.
#[derive(Clone, Debug)]
pub struct BoundaryOperator {
    m: usize,
    inverse: RingInverse,
}

impl BoundaryOperator {
    pub fn m(&self) -> usize {
        self.m
    }

    /// `8 (m / 2) - 4`.
    pub fn size(&self) -> usize {
        self.inverse.size()
    }

    pub fn inverse(&self) -> &RingInverse {
        &self.inverse
    }

    pub fn floats(&self) -> usize {
        self.inverse.floats()
    }

    pub fn hss_stats(&self) -> Option<HssStats> {
        match &self.inverse {
            RingInverse::Hss(h) => Some(h.stats()),
            RingInverse::Dense(_) => None,
        }
    }

    pub fn matvec(&self, load: &[f64]) -> Result<Vec<f64>> {
        self.inverse.matvec(load)
    }

    pub fn matvec_transpose(&self, load: &[f64]) -> Result<Vec<f64>> {
        self.inverse.matvec_transpose(load)
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        self.inverse.to_dense()
    }
}

/// Boundary-only HSS sweep that keeps just the outermost inverse.
pub fn boundary_operator<S: RingSource + ?Sized>(src: &mut S, tol: Tolerance, leaf_max: usize) -> Result<BoundaryOperator> {
    boundary_operator_with(src, Method::Hss { tol, leaf_max }, &mut ()).map(|(g, _)| g)
}

pub fn boundary_operator_with<S: RingSource + ?Sized>(
    src: &mut S,
    method: Method,
    observer: &mut dyn SweepObserver,
) -> Result<(BoundaryOperator, SweepSummary)> {
    let state = sweep(src, None, method, SweepMode::BoundaryOnly, observer)?;
    let summary = SweepSummary { steps: state.steps.clone(), peak_floats: state.peak_floats };
    Ok((state.into_boundary_operator(), summary))
}

/// Potentials on the outer ring for the given outer-ring load.
pub fn apply_boundary_solve(g: &BoundaryOperator, boundary_load: &[f64]) -> Result<Vec<f64>> {
    if boundary_load.len() != g.size() {
        return Err(Error::shape("load of the boundary operator size", boundary_load.len()));
    }
    g.matvec(boundary_load)
}

/// Per-step record of a sweep whose state was consumed.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub steps: Vec<StepInfo>,
    pub peak_floats: usize,
}

/// Interior potentials of a network in spiral and row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub spiral: Vec<f64>,
    pub row_major: Vec<f64>,
}

/// Full sweep and back substitution for the loads set by the network's
/// boundary temperatures.
pub fn solve_network(g: &GridNetwork, method: Method) -> Result<Solution> {
    let p = spiral_partition(g.m())?;
    let rhs = boundary_rhs(g, &p);
    let state = sweep(&mut NetworkSource::new(g, &p), Some(&rhs), method, SweepMode::Full, &mut ())?;
    let spiral = back_substitute(&state)?;
    let row_major = p.to_row_major(&spiral);
    Ok(Solution { spiral, row_major })
}
