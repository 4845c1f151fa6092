use std::io::Write;
use std::path::Path;
use std::time::Instant;

use qconv_core::bounds::{
    classical_converse, depolarising_exact, ea_bound_opt_rho_uses, ea_bound_uses, minimal_storage_uses,
    noisy_storage_minentropy, wang_renner_chi, BoundResult, TestClass,
};
use qconv_core::quantum::{mutual_information, DensityMatrix, QuantumChannel};
use rayon::prelude::*;

use crate::channel_file::{load_channel, parse_density, parse_ensemble, parse_stochastic, read};
use crate::config::{Command, Format, RhoMode, RunConfig};
use crate::output::{Cell, Table, BOUND_COLUMNS};
use crate::CliError;

pub const THREADS_ENV: &str = "QCONV_THREADS";

struct Point {
    class: String,
    beta: f64,
    bits: f64,
}

impl From<BoundResult> for Point {
    fn from(r: BoundResult) -> Self {
        Point { class: r.test_class.to_string(), beta: r.beta, bits: r.bits }
    }
}

fn thread_count(config: &RunConfig) -> Result<usize, CliError> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Validation(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
        Err(_) => match config.threads {
            Some(t) => t,
            None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        },
    };
    if n == 0 {
        return Err(CliError::Validation("thread count must be positive".into()));
    }
    Ok(n)
}

/// Evaluates grid points on `threads` workers; rows keep the order of `points`.
fn grid_table<F>(threads: usize, points: &[(usize, f64)], timing: bool, f: F) -> Result<Table, CliError>
where
    F: Fn(usize, f64) -> Result<Point, CliError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(Result<Point, CliError>, f64)> = pool.install(|| {
        points
            .par_iter()
            .map(|&(n, eps)| {
                let start = Instant::now();
                let r = f(n, eps);
                (r, start.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(points.len());
    for (&(n, eps), (r, ms)) in points.iter().zip(results) {
        let p = r?;
        rows.push(vec![
            Cell::Int(n as u64),
            Cell::Num(eps),
            Cell::Text(p.class),
            Cell::Num(p.beta),
            Cell::Num(p.bits),
            Cell::Num(p.bits / n as f64),
            Cell::Num(if timing { ms } else { 0.0 }),
        ]);
    }
    Ok(Table { columns: BOUND_COLUMNS.to_vec(), rows })
}

/// Input state on `dim_in^n`: a file state of that size, or of size `dim_in` taken to the n-th power.
fn input_state(path: &Path, dim_in: usize, n: usize) -> Result<DensityMatrix, CliError> {
    let rho = parse_density(&read(path)?)?;
    let total = dim_in.checked_pow(n as u32).ok_or_else(|| CliError::Validation("input dimension overflows".into()))?;
    if rho.dim() == total {
        return Ok(rho);
    }
    if rho.dim() != dim_in {
        return Err(CliError::Validation(format!("state has dimension {}, expected {dim_in} or {total}", rho.dim())));
    }
    let mut acc = rho.clone();
    for _ in 1..n {
        acc = acc.kron(&rho);
    }
    Ok(acc)
}

fn bound_point(channel: &QuantumChannel, n: usize, eps: f64, cls: TestClass, rho: &RhoMode) -> Result<Point, CliError> {
    let r = match rho {
        RhoMode::Optimize => ea_bound_opt_rho_uses(channel, n, eps, cls)?,
        RhoMode::MaximallyMixed => {
            let d = channel.dim_in().pow(n as u32);
            ea_bound_uses(channel, n, &DensityMatrix::maximally_mixed(d), eps, cls)?
        }
        RhoMode::File(path) => ea_bound_uses(channel, n, &input_state(path, channel.dim_in(), n)?, eps, cls)?,
    };
    Ok(r.into())
}

/// Computes the table a configuration describes without writing it.
pub fn run(config: &RunConfig) -> Result<Table, CliError> {
    let threads = thread_count(config)?;
    let timing = config.timing;
    match &config.command {
        Command::Depol { d, p, grid } => {
            grid_table(threads, &grid.points(), timing, |n, eps| Ok(depolarising_exact(*d, *p, n, eps)?.into()))
        }
        Command::Bound { channel, grid, class, rho } => {
            let ch = load_channel(channel)?;
            let cls = TestClass::from(*class);
            if let RhoMode::File(path) = rho {
                // fail on a bad state before any solve
                input_state(path, ch.dim_in(), grid.n.0[0])?;
            }
            grid_table(threads, &grid.points(), timing, |n, eps| bound_point(&ch, n, eps, cls, rho))
        }
        Command::Classical { matrix, eps } => {
            let w = parse_stochastic(&read(matrix)?)?;
            let points: Vec<_> = eps.0.iter().map(|&e| (1, e)).collect();
            grid_table(threads, &points, timing, |_, e| Ok(classical_converse(&w, e)?.into()))
        }
        Command::Chi { channel, ensemble, eps } => {
            let ch = load_channel(channel)?;
            let ens = parse_ensemble(&read(ensemble)?)?;
            let points: Vec<_> = eps.0.iter().map(|&e| (1, e)).collect();
            grid_table(threads, &points, timing, |_, e| {
                let bits = wang_renner_chi(&ens, &ch, e)?;
                Ok(Point { class: TestClass::All.to_string(), beta: (-bits).exp2(), bits })
            })
        }
        Command::Capacity { channel, rho } => {
            let ch = load_channel(channel)?;
            let state = match rho {
                RhoMode::MaximallyMixed => DensityMatrix::maximally_mixed(ch.dim_in()),
                RhoMode::File(path) => input_state(path, ch.dim_in(), 1)?,
                RhoMode::Optimize => {
                    return Err(CliError::Validation("capacity takes --rho maximally-mixed or a state file".into()));
                }
            };
            let i = mutual_information(&ch, &state)?;
            Ok(Table {
                columns: vec!["dim_in", "dim_out", "mutual_information_bits"],
                rows: vec![vec![Cell::Int(ch.dim_in() as u64), Cell::Int(ch.dim_out() as u64), Cell::Num(i)]],
            })
        }
        Command::Minentropy { d, p, rate, eps, n_max } => {
            let mut rows = Vec::new();
            for &e in &eps.0 {
                let row = match minimal_storage_uses(*d, *p, *rate, e, *n_max)? {
                    Some((n, bound)) => vec![
                        Cell::Num(e),
                        Cell::Num(*rate),
                        Cell::Int(n as u64),
                        Cell::Num(bound.bits),
                        Cell::Num(noisy_storage_minentropy(n as f64 * rate, &bound)),
                    ],
                    None => vec![Cell::Num(e), Cell::Num(*rate), Cell::Empty, Cell::Empty, Cell::Num(0.0)],
                };
                rows.push(row);
            }
            Ok(Table { columns: vec!["epsilon", "rate_bits_per_use", "n", "bound_bits", "min_entropy_bits"], rows })
        }
    }
}

/// Runs a configuration and writes the table to `--out` or stdout.
pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    let table = run(config)?;
    let text = match config.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match &config.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}
