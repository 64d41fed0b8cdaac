use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "divlab", version, about = "Divisor-problem error term laboratory")]
#[command(arg_required_else_help = true, args_override_self = true)]
pub struct Cli {
    /// key=value file; command-line flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "DIVLAB_THREADS")]
    pub threads: Option<usize>,

    /// Directory for CSV, JSON and manifest files
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

/// Global flags that take a value; used to locate the subcommand in argv.
pub const GLOBAL_VALUE_FLAGS: [&str; 3] = ["--config", "--threads", "--out"];

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Divisor counts d(n) and D(n) over [lo, hi]
    Sieve(SieveArgs),
    /// D(x) and Δ(x) at a point
    Delta(DeltaArgs),
    /// Mean square of the truncated Voronoi residual
    Voronoi(VoronoiArgs),
    /// Near-solutions of a square-root linear form
    Count(CountArgs),
    /// Smallest nonzero value of a square-root linear form
    Mingap(MingapArgs),
    /// Partial sums of the series constants
    Constants(ConstantsArgs),
    /// Moments of Δ over [2, X]
    Moment(MomentArgs),
    /// Moments of Δ over a short interval [X, X+H]
    Window(WindowArgs),
    /// Eighth moment of the exponential sum S(x, N, k)
    Expsum(ExpsumArgs),
    /// Run the acceptance suite
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sieve(_) => "sieve",
            Command::Delta(_) => "delta",
            Command::Voronoi(_) => "voronoi",
            Command::Count(_) => "count",
            Command::Mingap(_) => "mingap",
            Command::Constants(_) => "constants",
            Command::Moment(_) => "moment",
            Command::Window(_) => "window",
            Command::Expsum(_) => "expsum",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Args, serde::Serialize)]
pub struct SieveArgs {
    #[arg(long, default_value_t = 1)]
    pub lo: u64,
    #[arg(long)]
    pub hi: u64,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct DeltaArgs {
    #[arg(long, short = 'x')]
    pub x: f64,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct VoronoiArgs {
    /// Left end X of the sampled interval
    #[arg(long = "X", alias = "x0")]
    pub x0: f64,
    /// Length H of the sampled interval
    #[arg(long = "H", alias = "h")]
    pub h: f64,
    /// Ascending truncation points Y
    #[arg(long = "Y", alias = "cutoff", value_delimiter = ',', required = true)]
    pub cutoffs: Vec<u64>,
    #[arg(long, default_value_t = 20_000)]
    pub samples: u64,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct BudgetArgs {
    #[arg(long, default_value_t = 1 << 25)]
    pub max_side_entries: u64,
    #[arg(long, default_value_t = 1 << 32)]
    pub max_enumeration: u128,
    #[arg(long, default_value_t = 1 << 22)]
    pub max_certifications: u128,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct CountArgs {
    /// Positive and negative term counts, e.g. 2,2
    #[arg(long, value_delimiter = ',', required = true)]
    pub signature: Vec<usize>,
    /// One lo:hi range per variable, or a single range for all
    #[arg(long, value_delimiter = ',', required = true)]
    pub ranges: Vec<String>,
    /// Threshold δ (0 counts exact solutions, inf counts all non-solutions)
    #[arg(long)]
    pub delta: f64,
    /// Root exponent k
    #[arg(long, default_value_t = 2)]
    pub root: u32,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct MingapArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub signature: Vec<usize>,
    #[arg(long = "Y", alias = "y")]
    pub y: u64,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct ConstantsArgs {
    /// Cutoff for C1 and C2
    #[arg(long, default_value_t = 10_000)]
    pub low_cutoff: u64,
    /// Cutoff for C4 and C7
    #[arg(long, default_value_t = 256)]
    pub high_cutoff: u64,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct MomentArgs {
    /// Integer powers k
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u32>,
    /// Exponents A of |Δ|^A
    #[arg(long = "A", alias = "abs", value_delimiter = ',')]
    pub abs: Vec<f64>,
    /// Upper limits X
    #[arg(long = "X", alias = "x", value_delimiter = ',', required = true)]
    pub x: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub low_cutoff: u64,
    #[arg(long, default_value_t = 256)]
    pub high_cutoff: u64,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct WindowArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub k: Vec<u32>,
    #[arg(long = "X", alias = "x")]
    pub x: f64,
    #[arg(long = "H", alias = "h")]
    pub h: f64,
    /// Exponent margin in H >= X^(7/32+delta)
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub low_cutoff: u64,
    #[arg(long, default_value_t = 256)]
    pub high_cutoff: u64,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct ExpsumArgs {
    #[arg(long = "N", alias = "n")]
    pub n: u64,
    /// Root exponent k
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Lower end U of [U, 2U]
    #[arg(long = "U", alias = "u", value_delimiter = ',', required = true)]
    pub u: Vec<f64>,
    #[arg(long, default_value_t = 16)]
    pub samples: u64,
    /// Points of |S| written on an even grid over [U, 2U] (0 for none)
    #[arg(long, default_value_t = 0)]
    pub grid: u64,
}

#[derive(Debug, Args, serde::Serialize)]
pub struct VerifyArgs {
    /// Subset of criteria 1..=12 (default: all)
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u8>,
    /// Thread count of the repeat run used for the determinism check
    #[arg(long, default_value_t = 8)]
    pub compare_threads: usize,
}
