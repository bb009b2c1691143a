//! Network JSON, value lists and result CSVs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use netinv::solver::BoundaryOperator;
use netinv::{GridNetwork, RingPartition};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// On-disk form of a [`GridNetwork`].
///
/// `h_cond[r * (m + 1) + c]` is the bar from `(r, c)` to `(r, c + 1)` and
/// `v_cond[r * (m + 2) + c]` the bar from `(r, c)` to `(r + 1, c)`, on the
/// `(m + 2) x (m + 2)` grid including the boundary. `boundary_temps` runs
/// clockwise from the corner `(0, 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub m: usize,
    pub h_cond: Vec<f64>,
    pub v_cond: Vec<f64>,
    pub boundary_temps: Vec<f64>,
}

impl From<&GridNetwork> for NetworkFile {
    fn from(g: &GridNetwork) -> Self {
        Self {
            m: g.m(),
            h_cond: g.h_cond().to_vec(),
            v_cond: g.v_cond().to_vec(),
            boundary_temps: g.boundary_temps().to_vec(),
        }
    }
}

impl TryFrom<NetworkFile> for GridNetwork {
    type Error = netinv::Error;

    fn try_from(f: NetworkFile) -> Result<Self, Self::Error> {
        GridNetwork::new(f.m, f.h_cond, f.v_cond, f.boundary_temps)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub fn write_network(path: &Path, g: &GridNetwork) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, &NetworkFile::from(g)).map_err(|e| CliError::parse(path, e.to_string()))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_network(path: &Path) -> Result<GridNetwork, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let file: NetworkFile = serde_json::from_reader(BufReader::new(f))
        .map_err(|e| CliError::parse(path, format!("line {}, column {}: {e}", e.line(), e.column())))?;
    GridNetwork::try_from(file).map_err(|e| CliError::parse(path, e.to_string()))
}

/// Reads numbers separated by commas, whitespace or newlines. Lines starting
/// with `#` are skipped.
pub fn read_values(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for field in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()) {
            let v: f64 = field.parse().map_err(|_| CliError::parse(path, format!("line {}: `{field}` is not a number", line_no + 1)))?;
            out.push(v);
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct NodeValue {
    row: usize,
    col: usize,
    spiral: usize,
    value: f64,
}

/// Interior potentials, one row per node in row-major order. `row` and
/// `col` are interior coordinates.
pub fn write_solution_csv(path: &Path, p: &RingPartition, spiral: &[f64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let m = p.m();
    for idx in 0..m * m {
        let s = p.perm()[idx];
        w.serialize(NodeValue { row: idx / m, col: idx % m, spiral: s, value: spiral[s] })
            .map_err(|e| CliError::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Outer-ring potentials in spiral order.
pub fn write_boundary_csv(path: &Path, p: &RingPartition, potentials: &[f64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for (s, v) in p.ring_range(p.ring_count()).zip(potentials) {
        let (row, col) = p.coords(s);
        w.serialize(NodeValue { row, col, spiral: s, value: *v }).map_err(|e| CliError::parse(path, e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Serialize, Deserialize)]
pub struct OperatorFile {
    pub m: usize,
    pub size: usize,
    /// Row-major entries.
    pub entries: Vec<f64>,
}

pub fn write_operator_json(path: &Path, g: &BoundaryOperator) -> Result<(), CliError> {
    let dense = g.to_dense()?;
    let file = OperatorFile { m: g.m(), size: g.size(), entries: dense.into_vec() };
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, &file).map_err(|e| CliError::parse(path, e.to_string()))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub(crate) fn writer(path: &Path) -> Result<BufWriter<File>, CliError> {
    create(path)
}
