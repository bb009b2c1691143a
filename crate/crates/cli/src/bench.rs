//! Timed boundary-operator construction over a range of grid sizes.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use netinv::grid::NetworkSource;
use netinv::metrics::{compute_errors, OracleCaps};
use netinv::rng::{SeededRng, STREAM_BOUNDARY};
use netinv::solver::{boundary_operator_with, BoundaryOperator, Method, StepInfo, SweepObserver};
use netinv::{build_grid, spiral_partition, Tolerance};
use serde::Serialize;

use crate::error::CliError;
use crate::io::writer;
use crate::report::{write_reports_csv, write_reports_jsonl, RunReport};

pub const DEFAULT_EPS: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub eps: f64,
    pub leaf_max: usize,
    pub caps: OracleCaps,
    pub cond_low: f64,
    pub cond_high: f64,
    /// Repetitions of the apply timing; the median is reported.
    pub apply_repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![64, 128, 256],
            seeds: vec![1],
            eps: DEFAULT_EPS,
            leaf_max: netinv::hss::DEFAULT_LEAF_MAX,
            caps: OracleCaps::default(),
            cond_low: 1.0,
            cond_high: 2.0,
            apply_repeats: 3,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        if self.sizes.is_empty() || self.seeds.is_empty() {
            return bad("at least one size and one seed are required".into());
        }
        if let Some(m) = self.sizes.iter().find(|&&m| m < 2 || m % 2 != 0) {
            return bad(format!("grid size {m} must be even and at least 2"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps {} must be positive", self.eps));
        }
        if self.leaf_max == 0 {
            return bad("leaf size must be positive".into());
        }
        if !(self.cond_low > 0.0 && self.cond_low <= self.cond_high && self.cond_high.is_finite()) {
            return bad(format!("conductivity range [{}, {}] is invalid", self.cond_low, self.cond_high));
        }
        if self.apply_repeats == 0 {
            return bad("apply repetitions must be positive".into());
        }
        Ok(())
    }
}

/// Records wall time per elimination step, and the steps at which a
/// tessellation was built (the first HSS ring) or rebuilt.
#[derive(Debug, Default)]
pub struct StepTimer {
    started: Option<Instant>,
    seen_hss: bool,
    pub times: Vec<f64>,
    pub retessellations: Vec<usize>,
}

impl SweepObserver for StepTimer {
    fn step_started(&mut self, _ring: usize) {
        self.started = Some(Instant::now());
    }

    fn step_finished(&mut self, info: &StepInfo) {
        let t = self.started.take().map_or(0.0, |s| s.elapsed().as_secs_f64());
        self.times.push(t);
        if info.retessellated || (info.hss && !self.seen_hss) {
            self.retessellations.push(info.ring);
        }
        self.seen_hss |= info.hss;
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Seconds per application of `op`, as the median of `repeats` timed
/// batches. Batches are sized to run for about 20 ms.
pub fn time_apply(op: &BoundaryOperator, seed: u64, repeats: usize) -> Result<f64, CliError> {
    let load = SeededRng::new(seed, STREAM_BOUNDARY).unit_vector(op.size());
    let start = Instant::now();
    std::hint::black_box(op.matvec(&load)?);
    let once = start.elapsed().as_secs_f64().max(1e-9);
    let batch = ((0.02 / once) as usize).clamp(1, 100_000);
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        for _ in 0..batch {
            std::hint::black_box(op.matvec(std::hint::black_box(&load))?);
        }
        samples.push(start.elapsed().as_secs_f64() / batch as f64);
    }
    Ok(median(&mut samples))
}

/// Builds the grid for `(m, seed)`, times the boundary-only sweep and the
/// operator application, and runs whichever error oracles the caps allow.
pub fn run_case(m: usize, seed: u64, cfg: &BenchConfig) -> Result<RunReport, CliError> {
    let g = build_grid(m, seed, cfg.cond_low, cfg.cond_high)?;
    let p = spiral_partition(m)?;
    let method = Method::Hss { tol: Tolerance::Absolute(cfg.eps), leaf_max: cfg.leaf_max };
    let mut timer = StepTimer::default();
    let start = Instant::now();
    let (op, summary) = boundary_operator_with(&mut NetworkSource::new(&g, &p), method, &mut timer)?;
    let t_invert_s = start.elapsed().as_secs_f64();
    let t_apply_s = time_apply(&op, seed, cfg.apply_repeats)?;
    let errors = compute_errors(&op, &g, seed, cfg.caps)?;
    Ok(RunReport {
        n: m * m,
        m,
        eps: cfg.eps,
        leaf_max: cfg.leaf_max,
        seed,
        t_invert_s,
        t_apply_s,
        mem_floats: summary.peak_floats,
        t_steps: timer.times,
        retessellations: timer.retessellations,
        e1: errors.e1,
        e2: errors.e2,
        e3: errors.e3,
        e4: errors.e4,
    })
}

/// Runs every size and seed in order, handing each report to `on_report`.
pub fn run_bench(cfg: &BenchConfig, mut on_report: impl FnMut(&RunReport)) -> Result<Vec<RunReport>, CliError> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &m in &cfg.sizes {
        for &seed in &cfg.seeds {
            let r = run_case(m, seed, cfg)?;
            on_report(&r);
            out.push(r);
        }
    }
    Ok(out)
}

/// Medians over seeds for each grid size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub n: usize,
    pub m: usize,
    pub t_invert_s: f64,
    pub t_apply_s: f64,
    pub mem_floats: f64,
}

pub fn summarize(reports: &[RunReport]) -> Vec<SizeSummary> {
    let mut by_m: BTreeMap<usize, Vec<&RunReport>> = BTreeMap::new();
    for r in reports {
        by_m.entry(r.m).or_default().push(r);
    }
    by_m.into_iter()
        .map(|(m, rs)| {
            let col = |f: fn(&RunReport) -> f64| median(&mut rs.iter().map(|r| f(r)).collect::<Vec<_>>());
            SizeSummary {
                n: m * m,
                m,
                t_invert_s: col(|r| r.t_invert_s),
                t_apply_s: col(|r| r.t_apply_s),
                mem_floats: col(|r| r.mem_floats as f64),
            }
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Growth exponents against `N = m^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Slopes {
    pub invert: f64,
    pub apply: f64,
    pub memory: f64,
}

/// `None` with fewer than two distinct sizes.
pub fn fit_slopes(reports: &[RunReport]) -> Option<Slopes> {
    let s = summarize(reports);
    if s.len() < 2 {
        return None;
    }
    let n: Vec<f64> = s.iter().map(|r| r.n as f64).collect();
    let col = |f: fn(&SizeSummary) -> f64| s.iter().map(f).collect::<Vec<_>>();
    Some(Slopes {
        invert: log_log_slope(&n, &col(|r| r.t_invert_s)),
        apply: log_log_slope(&n, &col(|r| r.t_apply_s)),
        memory: log_log_slope(&n, &col(|r| r.mem_floats)),
    })
}

#[derive(Serialize)]
struct ScalingRow {
    n: usize,
    m: usize,
    t_invert_per_n: f64,
    t_apply_per_sqrt_n: f64,
    mem_per_sqrt_n: f64,
}

#[derive(Serialize)]
struct StepRow {
    m: usize,
    seed: u64,
    ring: usize,
    t_step_s: f64,
    retessellated: bool,
}

/// Writes `reports.csv`, `reports.jsonl`, `scaling.csv` (normalized
/// costs per size) and `steps.csv` (per-step times) into `dir`.
pub fn write_outputs(dir: &Path, reports: &[RunReport]) -> Result<(), CliError> {
    write_reports_csv(&dir.join("reports.csv"), reports)?;
    write_reports_jsonl(&dir.join("reports.jsonl"), reports)?;

    let path = dir.join("scaling.csv");
    let mut w = csv::Writer::from_writer(writer(&path)?);
    for s in summarize(reports) {
        let root = (s.n as f64).sqrt();
        w.serialize(ScalingRow {
            n: s.n,
            m: s.m,
            t_invert_per_n: s.t_invert_s / s.n as f64,
            t_apply_per_sqrt_n: s.t_apply_s / root,
            mem_per_sqrt_n: s.mem_floats / root,
        })
        .map_err(|e| CliError::parse(&path, e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let path = dir.join("steps.csv");
    let mut w = csv::Writer::from_writer(writer(&path)?);
    for r in reports {
        for (i, &t) in r.t_steps.iter().enumerate() {
            let ring = i + 1;
            let row = StepRow { m: r.m, seed: r.seed, ring, t_step_s: t, retessellated: r.retessellations.contains(&ring) };
            w.serialize(row).map_err(|e| CliError::parse(&path, e.to_string()))?;
        }
    }
    w.flush().map_err(|e| CliError::io(&path, e))
}

/// Steps at which the time level shifts up: the step and the one after it
/// both exceed `factor` times the median of the `window` steps before.
/// Single-step spikes are not reported.
pub fn step_jumps(times: &[f64], window: usize, factor: f64) -> Vec<usize> {
    (window..times.len().saturating_sub(1))
        .filter(|&i| {
            let base = factor * median(&mut times[i - window..i].to_vec());
            times[i] > base && times[i + 1] > base
        })
        .map(|i| i + 1)
        .collect()
}
