use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use netinv::grid::NetworkSource;
use netinv::metrics::OracleCaps;
use netinv::solver::{apply_boundary_solve, back_substitute, sweep, Method, SweepMode};
use netinv::{boundary_rhs, build_grid, spiral_partition, Tolerance};
use netinv_cli::bench::{fit_slopes, run_bench, write_outputs, BenchConfig, DEFAULT_EPS};
use netinv_cli::io::{read_network, read_values, write_boundary_csv, write_network, write_operator_json, write_solution_csv};
use netinv_cli::verify::{run_verify, Level};
use netinv_cli::CliError;

/// Direct solver for conduction networks on square grids
#[derive(Parser, Debug)]
#[command(name = "netinv", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Potentials at every interior node
    Full,
    /// Potentials on the outermost ring only
    Boundary,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random network and write it as JSON
    Assemble {
        /// Interior side length (even)
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        cond_low: f64,
        #[arg(long, default_value_t = 2.0)]
        cond_high: f64,
        /// Constant boundary temperature
        #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["boundary_low", "boundary_high"])]
        boundary_const: Option<f64>,
        /// Random boundary temperatures in [low, high], drawn from the seed
        #[arg(long, allow_negative_numbers = true, requires = "boundary_high")]
        boundary_low: Option<f64>,
        #[arg(long, allow_negative_numbers = true, requires = "boundary_low")]
        boundary_high: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a network and write the potentials as CSV
    Solve {
        #[arg(long)]
        network: PathBuf,
        /// Replace the network's boundary temperatures (4(m+1) values, clockwise from the top-left corner)
        #[arg(long)]
        boundary_temps: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Full)]
        mode: Mode,
        /// Compression tolerance
        #[arg(long, env = "NETINV_EPS", default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[arg(long, default_value_t = netinv::hss::DEFAULT_LEAF_MAX)]
        leaf_max: usize,
        /// Use dense ring inverses (exact, O(N^2))
        #[arg(long)]
        dense: bool,
        #[arg(long)]
        out: PathBuf,
        /// Also write the boundary operator as JSON (boundary mode)
        #[arg(long)]
        operator_out: Option<PathBuf>,
    },
    /// Time boundary-operator construction and application over grid sizes
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seeds: Vec<u64>,
        #[arg(long, env = "NETINV_EPS", default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[arg(long, default_value_t = netinv::hss::DEFAULT_LEAF_MAX)]
        leaf_max: usize,
        /// Largest m for the dense-sweep oracle (e1, e2)
        #[arg(long, default_value_t = 200)]
        oracle_cap: usize,
        /// Largest m for the conjugate-gradient oracle (e3, e4)
        #[arg(long, default_value_t = 700)]
        cg_cap: usize,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in consistency checks
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
    },
}

fn solve(
    network: PathBuf,
    boundary_temps: Option<PathBuf>,
    mode: Mode,
    method: Method,
    out: PathBuf,
    operator_out: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut g = read_network(&network)?;
    if let Some(path) = boundary_temps {
        let temps = read_values(&path)?;
        g = g.with_boundary_temps(temps).map_err(|e| CliError::parse(&path, e.to_string()))?;
    }
    let p = spiral_partition(g.m())?;
    let rhs = boundary_rhs(&g, &p);
    match mode {
        Mode::Full => {
            if operator_out.is_some() {
                return Err(CliError::Validation("--operator-out needs --mode boundary".into()));
            }
            let state = sweep(&mut NetworkSource::new(&g, &p), Some(&rhs), method, SweepMode::Full, &mut ())?;
            write_solution_csv(&out, &p, &back_substitute(&state)?)
        }
        Mode::Boundary => {
            let state = sweep(&mut NetworkSource::new(&g, &p), Some(&rhs), method, SweepMode::BoundaryOnly, &mut ())?;
            let op = state.into_boundary_operator();
            let potentials = apply_boundary_solve(&op, rhs.last().expect("at least one ring"))?;
            write_boundary_csv(&out, &p, &potentials)?;
            match operator_out {
                Some(path) => write_operator_json(&path, &op),
                None => Ok(()),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Assemble { m, seed, cond_low, cond_high, boundary_const, boundary_low, boundary_high, out } => {
            let mut g = build_grid(m, seed, cond_low, cond_high)?;
            if let Some(t) = boundary_const {
                g = g.with_constant_boundary(t)?;
            }
            if let (Some(lo), Some(hi)) = (boundary_low, boundary_high) {
                g = g.with_random_boundary(seed, lo, hi)?;
            }
            write_network(&out, &g)
        }
        Command::Solve { network, boundary_temps, mode, eps, leaf_max, dense, out, operator_out } => {
            let method = if dense { Method::Dense } else { Method::Hss { tol: Tolerance::Absolute(eps), leaf_max } };
            solve(network, boundary_temps, mode, method, out, operator_out)
        }
        Command::Bench { sizes, seeds, eps, leaf_max, oracle_cap, cg_cap, out } => {
            let cfg = BenchConfig { sizes, seeds, eps, leaf_max, caps: OracleCaps { dense: oracle_cap, cg: cg_cap }, ..Default::default() };
            let fmt = |e: Option<f64>| e.map_or("-".to_string(), |v| format!("{v:.2e}"));
            println!("{:>8} {:>6} {:>6} {:>11} {:>11} {:>11} {:>9} {:>9} {:>9} {:>9}", "N", "m", "seed", "t_invert_s", "t_apply_s", "mem_floats", "e1", "e2", "e3", "e4");
            let reports = run_bench(&cfg, |r| {
                println!(
                    "{:>8} {:>6} {:>6} {:>11.3e} {:>11.3e} {:>11} {:>9} {:>9} {:>9} {:>9}",
                    r.n, r.m, r.seed, r.t_invert_s, r.t_apply_s, r.mem_floats, fmt(r.e1), fmt(r.e2), fmt(r.e3), fmt(r.e4)
                );
            })?;
            write_outputs(&out, &reports)?;
            if let Some(s) = fit_slopes(&reports) {
                println!("exponents vs N: invert {:.3}, apply {:.3}, memory {:.3}", s.invert, s.apply, s.memory);
            }
            Ok(())
        }
        Command::Verify { level } => {
            let checks = run_verify(level);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(CliError::Verify(format!("{failed} of {} checks failed", checks.len())));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
