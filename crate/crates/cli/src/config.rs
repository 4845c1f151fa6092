use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qconv_core::bounds::TestClass;

/// Stand-in error probabilities for the depolarising sweep.
pub const DEFAULT_EPS: &str = "1e-2,1e-4,1e-6";

#[derive(Parser, Debug, Clone)]
#[command(name = "qconv", version, about = "Finite-blocklength converse bounds for quantum channels")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for grid points (default: logical cores); QCONV_THREADS overrides it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Record per-point wall time; otherwise wall_ms is 0 and output is reproducible.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Exact bound for n uses of the d-dimensional depolarising channel.
    Depol {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        grid: Grid,
    },
    /// SDP bound for n uses of a channel read from JSON.
    Bound {
        #[arg(long)]
        channel: PathBuf,
        #[command(flatten)]
        grid: Grid,
        #[arg(long, value_enum, default_value_t = ClassArg::All)]
        class: ClassArg,
        /// maximally-mixed, optimize, or a JSON file holding a density matrix.
        #[arg(long, default_value = "maximally-mixed")]
        rho: RhoMode,
    },
    /// Converse for a classical channel given as a JSON stochastic matrix w[y][x].
    Classical {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = DEFAULT_EPS)]
        eps: EpsList,
    },
    /// Mutual information I(E, rho).
    Capacity {
        #[arg(long)]
        channel: PathBuf,
        /// maximally-mixed or a JSON file holding a density matrix.
        #[arg(long, default_value = "maximally-mixed")]
        rho: RhoMode,
    },
    /// Hypothesis-testing bound for a fixed input ensemble.
    Chi {
        #[arg(long)]
        channel: PathBuf,
        /// JSON array of {"p": .., "state": [[..]]}.
        #[arg(long)]
        ensemble: PathBuf,
        #[arg(long, default_value = DEFAULT_EPS)]
        eps: EpsList,
    },
    /// Smallest storage blocklength a depolarising memory cannot hold at the given rate.
    Minentropy {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: f64,
        /// Bits stored per channel use.
        #[arg(long)]
        rate: f64,
        #[arg(long, default_value = DEFAULT_EPS)]
        eps: EpsList,
        #[arg(long, default_value_t = 1000)]
        n_max: usize,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Grid {
    /// Comma-separated error probabilities in (0, 1).
    #[arg(long, default_value = DEFAULT_EPS)]
    pub eps: EpsList,
    /// Blocklengths as `a..b` (inclusive) or a single value.
    #[arg(long, default_value = "1")]
    pub n: NRange,
}

impl Grid {
    /// Grid points sorted by `(n, eps)`.
    pub fn points(&self) -> Vec<(usize, f64)> {
        self.n.0.iter().flat_map(|&n| self.eps.0.iter().map(move |&e| (n, e))).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    All,
    Ppt,
}

impl From<ClassArg> for TestClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::All => TestClass::All,
            ClassArg::Ppt => TestClass::Ppt,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RhoMode {
    MaximallyMixed,
    Optimize,
    File(PathBuf),
}

impl FromStr for RhoMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "maximally-mixed" => RhoMode::MaximallyMixed,
            "optimize" => RhoMode::Optimize,
            "" => return Err("empty rho mode".into()),
            path => RhoMode::File(PathBuf::from(path)),
        })
    }
}

/// Sorted, deduplicated error probabilities, each in (0, 1).
#[derive(Clone, Debug, PartialEq)]
pub struct EpsList(pub Vec<f64>);

impl FromStr for EpsList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut v = Vec::new();
        for part in s.split(',') {
            let e: f64 = part.trim().parse().map_err(|_| format!("not a number: {part:?}"))?;
            if !(e > 0.0 && e < 1.0) {
                return Err(format!("epsilon must lie in (0, 1), got {e}"));
            }
            v.push(e);
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        Ok(EpsList(v))
    }
}

/// Blocklengths `a..=b` with `1 <= a <= b`.
#[derive(Clone, Debug, PartialEq)]
pub struct NRange(pub Vec<usize>);

impl FromStr for NRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let int = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("not a blocklength: {t:?}"));
        let (a, b) = match s.split_once("..") {
            Some((a, b)) => (int(a)?, int(b.strip_prefix('=').unwrap_or(b))?),
            None => (int(s)?, int(s)?),
        };
        if a == 0 || a > b {
            return Err(format!("blocklength range must satisfy 1 <= a <= b, got {s}"));
        }
        Ok(NRange((a..=b).collect()))
    }
}
