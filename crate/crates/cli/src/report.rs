use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::io::writer;

/// One benchmark row: a single grid size and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub leaf_max: usize,
    pub seed: u64,
    /// Wall time of the boundary-only sweep.
    pub t_invert_s: f64,
    /// Wall time of one application of the boundary operator.
    pub t_apply_s: f64,
    /// Peak floats held in ring inverses during the sweep.
    pub mem_floats: usize,
    /// Wall time of each elimination step, innermost ring first.
    pub t_steps: Vec<f64>,
    /// Rings at which a tessellation was built or rebuilt.
    pub retessellations: Vec<usize>,
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub e3: Option<f64>,
    pub e4: Option<f64>,
}

impl RunReport {
    /// The report without its timing fields, for determinism checks.
    pub fn without_timings(&self) -> RunReport {
        RunReport { t_invert_s: 0.0, t_apply_s: 0.0, t_steps: vec![0.0; self.t_steps.len()], ..self.clone() }
    }
}

/// CSV form: list fields are `;`-joined.
#[derive(Serialize)]
struct CsvRow {
    n: usize,
    m: usize,
    eps: f64,
    leaf_max: usize,
    seed: u64,
    t_invert_s: f64,
    t_apply_s: f64,
    mem_floats: usize,
    t_steps: String,
    retessellations: String,
    e1: Option<f64>,
    e2: Option<f64>,
    e3: Option<f64>,
    e4: Option<f64>,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

pub fn write_reports_csv(path: &Path, reports: &[RunReport]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer(path)?);
    for r in reports {
        w.serialize(CsvRow {
            n: r.n,
            m: r.m,
            eps: r.eps,
            leaf_max: r.leaf_max,
            seed: r.seed,
            t_invert_s: r.t_invert_s,
            t_apply_s: r.t_apply_s,
            mem_floats: r.mem_floats,
            t_steps: join(&r.t_steps),
            retessellations: join(&r.retessellations),
            e1: r.e1,
            e2: r.e2,
            e3: r.e3,
            e4: r.e4,
        })
        .map_err(|e| CliError::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_reports_jsonl(path: &Path, reports: &[RunReport]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    for r in reports {
        serde_json::to_writer(&mut w, r).map_err(|e| CliError::parse(path, e.to_string()))?;
        writeln!(w).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
