use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng::{SeededRng, STREAM_BOUNDARY, STREAM_CONDUCTIVITY};

/// A square conduction network: `m x m` interior nodes surrounded by a ring
/// of `4(m + 1)` boundary nodes with prescribed temperatures. Every pair of
/// grid neighbours is joined by a bar of positive conductivity.
///
/// Layout, on the full `(m + 2) x (m + 2)` grid with `(r, c)` row-major:
/// - `h_cond[r * (m + 1) + c]` joins `(r, c)` and `(r, c + 1)`;
/// - `v_cond[r * (m + 2) + c]` joins `(r, c)` and `(r + 1, c)`;
/// - `boundary_temps` runs clockwise from the top-left corner `(0, 0)`:
///   top row left to right, right column downwards, bottom row right to
///   left, left column upwards.
///
/// Bars between two boundary nodes are stored but never used.
#[derive(Clone, Debug, PartialEq)]
pub struct GridNetwork {
    m: usize,
    h_cond: Vec<f64>,
    v_cond: Vec<f64>,
    boundary_temps: Vec<f64>,
}

pub(crate) fn check_side(m: usize) -> Result<()> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::InvalidGrid(format!("interior side must be an even integer >= 2, got {m}")));
    }
    Ok(())
}

impl GridNetwork {
    pub fn new(m: usize, h_cond: Vec<f64>, v_cond: Vec<f64>, boundary_temps: Vec<f64>) -> Result<Self> {
        check_side(m)?;
        let bars = (m + 2) * (m + 1);
        if h_cond.len() != bars || v_cond.len() != bars {
            return Err(Error::InvalidGrid(format!(
                "expected {bars} horizontal and vertical bars, got {} and {}",
                h_cond.len(),
                v_cond.len()
            )));
        }
        if boundary_temps.len() != 4 * (m + 1) {
            return Err(Error::InvalidGrid(format!(
                "expected {} boundary temperatures, got {}",
                4 * (m + 1),
                boundary_temps.len()
            )));
        }
        for (name, values) in [("h_cond", &h_cond), ("v_cond", &v_cond)] {
            if let Some(i) = values.iter().position(|c| !(c.is_finite() && *c > 0.0)) {
                return Err(Error::InvalidGrid(format!("{name}[{i}] = {} is not a positive conductivity", values[i])));
            }
        }
        if let Some(i) = boundary_temps.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid(format!("boundary_temps[{i}] is not finite")));
        }
        Ok(Self { m, h_cond, v_cond, boundary_temps })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of interior unknowns, `m^2`.
    pub fn unknowns(&self) -> usize {
        self.m * self.m
    }

    pub fn h_cond(&self) -> &[f64] {
        &self.h_cond
    }

    pub fn v_cond(&self) -> &[f64] {
        &self.v_cond
    }

    pub fn boundary_temps(&self) -> &[f64] {
        &self.boundary_temps
    }

    pub fn with_boundary_temps(mut self, temps: Vec<f64>) -> Result<Self> {
        if temps.len() != 4 * (self.m + 1) {
            return Err(Error::InvalidGrid(format!("expected {} boundary temperatures, got {}", 4 * (self.m + 1), temps.len())));
        }
        if temps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("boundary temperatures must be finite".into()));
        }
        self.boundary_temps = temps;
        Ok(self)
    }

    pub fn with_constant_boundary(self, t: f64) -> Result<Self> {
        let n = 4 * (self.m + 1);
        self.with_boundary_temps(alloc::vec![t; n])
    }

    /// Boundary temperatures drawn uniformly from `[low, high)`.
    pub fn with_random_boundary(self, seed: u64, low: f64, high: f64) -> Result<Self> {
        let mut rng = SeededRng::new(seed, STREAM_BOUNDARY);
        let temps = (0..4 * (self.m + 1)).map(|_| rng.uniform_in(low, high)).collect();
        self.with_boundary_temps(temps)
    }

    #[inline]
    fn horizontal(&self, r: usize, c: usize) -> f64 {
        self.h_cond[r * (self.m + 1) + c]
    }

    #[inline]
    fn vertical(&self, r: usize, c: usize) -> f64 {
        self.v_cond[r * (self.m + 2) + c]
    }

    /// Conductivities of the bars at interior node `(i, j)`, in the order
    /// up, right, down, left.
    pub fn bars(&self, i: usize, j: usize) -> [f64; 4] {
        let (r, c) = (i + 1, j + 1);
        [self.vertical(r - 1, c), self.horizontal(r, c), self.vertical(r, c), self.horizontal(r, c - 1)]
    }

    /// Position in `boundary_temps` of full-grid node `(r, c)`, if it is a
    /// boundary node.
    pub fn boundary_index(&self, r: usize, c: usize) -> Option<usize> {
        let e = self.m + 1;
        match (r, c) {
            (0, c) if c <= e => Some(c),
            (r, c) if c == e && r >= 1 && r <= e => Some(e + r),
            (r, c) if r == e && c < e => Some(2 * e + (e - c)),
            (r, 0) if r >= 1 && r < e => Some(3 * e + (e - r)),
            _ => None,
        }
    }

    /// Sum of conductivity times temperature over the boundary bars at
    /// interior node `(i, j)`.
    pub fn boundary_load_at(&self, i: usize, j: usize) -> f64 {
        let (r, c) = (i + 1, j + 1);
        let [up, right, down, left] = self.bars(i, j);
        let mut load = 0.0;
        for (cond, (nr, nc)) in [(up, (r - 1, c)), (right, (r, c + 1)), (down, (r + 1, c)), (left, (r, c - 1))] {
            if let Some(b) = self.boundary_index(nr, nc) {
                load += cond * self.boundary_temps[b];
            }
        }
        load
    }

    /// Right-hand side of the interior system in row-major order.
    pub fn boundary_load(&self) -> Vec<f64> {
        let m = self.m;
        (0..m * m).map(|k| self.boundary_load_at(k / m, k % m)).collect()
    }

    /// Five-point product `A x` in row-major interior order.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.m;
        assert_eq!(x.len(), m * m);
        assert_eq!(y.len(), m * m);
        for i in 0..m {
            for j in 0..m {
                let k = i * m + j;
                let [up, right, down, left] = self.bars(i, j);
                let mut acc = (up + right + down + left) * x[k];
                if i > 0 {
                    acc -= up * x[k - m];
                }
                if j + 1 < m {
                    acc -= right * x[k + 1];
                }
                if i + 1 < m {
                    acc -= down * x[k + m];
                }
                if j > 0 {
                    acc -= left * x[k - 1];
                }
                y[k] = acc;
            }
        }
    }

    /// The full interior system matrix in row-major order. Only sensible
    /// for small grids.
    pub fn dense_matrix(&self) -> DenseMatrix {
        let m = self.m;
        let n = m * m;
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..m {
            for j in 0..m {
                let k = i * m + j;
                let [up, right, down, left] = self.bars(i, j);
                a[(k, k)] = up + right + down + left;
                if i > 0 {
                    a[(k, k - m)] = -up;
                }
                if j + 1 < m {
                    a[(k, k + 1)] = -right;
                }
                if i + 1 < m {
                    a[(k, k + m)] = -down;
                }
                if j > 0 {
                    a[(k, k - 1)] = -left;
                }
            }
        }
        a
    }
}

/// Random network with i.i.d. conductivities uniform on
/// `[cond_low, cond_high)` and zero boundary temperatures.
///
/// Conductivities are drawn from stream [`STREAM_CONDUCTIVITY`] of
/// [`SeededRng`]: all horizontal bars in row-major order, then all vertical
/// bars in row-major order.
pub fn build_grid(m: usize, seed: u64, cond_low: f64, cond_high: f64) -> Result<GridNetwork> {
    check_side(m)?;
    if !(cond_low > 0.0 && cond_low <= cond_high && cond_high.is_finite()) {
        return Err(Error::InvalidGrid(format!("conductivity interval [{cond_low}, {cond_high}] must satisfy 0 < low <= high")));
    }
    let mut rng = SeededRng::new(seed, STREAM_CONDUCTIVITY);
    let bars = (m + 2) * (m + 1);
    let h_cond = (0..bars).map(|_| rng.uniform_in(cond_low, cond_high)).collect();
    let v_cond = (0..bars).map(|_| rng.uniform_in(cond_low, cond_high)).collect();
    GridNetwork::new(m, h_cond, v_cond, alloc::vec![0.0; 4 * (m + 1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_interval_gives_unit_bars() {
        let g = build_grid(2, 99, 1.0, 1.0).unwrap();
        assert!(g.h_cond().iter().chain(g.v_cond()).all(|&c| c == 1.0));
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(build_grid(6, 42, 1.0, 2.0).unwrap(), build_grid(6, 42, 1.0, 2.0).unwrap());
        assert_ne!(build_grid(6, 42, 1.0, 2.0).unwrap(), build_grid(6, 43, 1.0, 2.0).unwrap());
    }

    #[test]
    fn sample_mean_is_midpoint() {
        // 2 * 102 * 101 draws, standard error of the mean ~ 0.29 / 144 = 0.002
        let g = build_grid(100, 5, 1.0, 2.0).unwrap();
        let all: Vec<f64> = g.h_cond().iter().chain(g.v_cond()).copied().collect();
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        assert!((mean - 1.5).abs() < 0.01, "{mean}");
        assert!(all.iter().all(|&c| (1.0..2.0).contains(&c)));
    }

    #[test]
    fn invalid_inputs() {
        assert!(build_grid(3, 0, 1.0, 2.0).is_err());
        assert!(build_grid(0, 0, 1.0, 2.0).is_err());
        assert!(build_grid(4, 0, 0.0, 2.0).is_err());
        assert!(build_grid(4, 0, 2.0, 1.0).is_err());
        let g = build_grid(2, 0, 1.0, 2.0).unwrap();
        let mut h = g.h_cond().to_vec();
        h[3] = -1.0;
        assert!(GridNetwork::new(2, h, g.v_cond().to_vec(), g.boundary_temps().to_vec()).is_err());
        assert!(g.with_boundary_temps(alloc::vec![0.0; 3]).is_err());
    }

    #[test]
    fn boundary_indices_cover_ring_once() {
        let g = build_grid(4, 0, 1.0, 1.0).unwrap();
        let mut seen = alloc::vec![false; 20];
        for r in 0..6 {
            for c in 0..6 {
                let on_boundary = r == 0 || c == 0 || r == 5 || c == 5;
                match g.boundary_index(r, c) {
                    Some(b) => {
                        assert!(on_boundary && !seen[b]);
                        seen[b] = true;
                    }
                    None => assert!(!on_boundary),
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(g.boundary_index(0, 0), Some(0));
        assert_eq!(g.boundary_index(1, 5), Some(6));
        assert_eq!(g.boundary_index(5, 0), Some(15));
        assert_eq!(g.boundary_index(1, 0), Some(19));
    }

    #[test]
    fn unit_bars_give_five_point_stencil() {
        let g = build_grid(4, 0, 1.0, 1.0).unwrap();
        let a = g.dense_matrix();
        for k in 0..16 {
            assert_eq!(a[(k, k)], 4.0);
            let offs: Vec<f64> = (0..16).filter(|&l| l != k && a[(k, l)] != 0.0).map(|l| a[(k, l)]).collect();
            assert!(offs.iter().all(|&v| v == -1.0));
        }
        let x: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let mut y = alloc::vec![0.0; 16];
        g.apply(&x, &mut y);
        assert_eq!(y, a.matvec(&x));
    }

    #[test]
    fn constant_boundary_load_counts_bars() {
        let g = build_grid(4, 0, 1.0, 1.0).unwrap().with_constant_boundary(3.0).unwrap();
        let b = g.boundary_load();
        // corners touch two boundary bars, edge nodes one, inner nodes none
        assert_eq!(b[0], 6.0);
        assert_eq!(b[1], 3.0);
        assert_eq!(b[5], 0.0);
        assert_eq!(b[15], 6.0);
        assert_eq!(build_grid(4, 0, 1.0, 1.0).unwrap().boundary_load(), alloc::vec![0.0; 16]);
    }
}
