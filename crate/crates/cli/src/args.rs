use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Numerical laboratory for locally constant SL(2,R) cocycles over the
/// two-sided Bernoulli shift.
#[derive(Debug, Parser)]
#[command(name = "cocycle-lab", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for parallel sections (default: machine parallelism).
    /// Outputs are byte-identical across worker counts.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo estimate of the top Lyapunov exponent (JSON)
    Exponent(ExponentArgs),
    /// Exact Holder distance between base and perturbed cocycle per k,
    /// against the assembled analytic bound (JSON or CSV)
    Holder(HolderArgs),
    /// Certify that the marker-window product swaps the coordinate
    /// directions; exits 1 when the residual gate fails (JSON)
    VerifySwap(VerifySwapArgs),
    /// Classify parameter regions: single point (JSON) or grid sweep (CSV)
    Regions(RegionsArgs),
    /// Empirical mean first-return time against the Kac prediction (JSON)
    Kac(KacArgs),
    /// Search for the fiber-bunching level of the base cocycle (JSON)
    Bunching(BunchingArgs),
    /// Run the acceptance suite; exits 1 unless every criterion passes (JSON)
    Repro,
}

/// The matrix-family parameters shared by the cocycle commands.
#[derive(Debug, Clone, Args)]
pub struct GeomArgs {
    /// Diagonal stretch of the symbol-1 matrix
    #[arg(long, default_value_t = 4.0)]
    pub sigma: f64,

    /// Diagonal stretch of the symbol-0 matrix
    #[arg(long, default_value_t = 2.0)]
    pub eta: f64,

    /// Holder exponent used by norms and bunching
    #[arg(long, default_value_t = 0.4)]
    pub alpha: f64,

    /// Perturbation profile exponent, in [1, 2)
    #[arg(long, default_value_t = 4.0 / 3.0)]
    pub gamma: f64,
}

/// Monte Carlo effort and seeding.
#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Iterates per trial
    #[arg(long, default_value_t = 100_000)]
    pub steps: u64,

    /// Independent trials
    #[arg(long, default_value_t = 64)]
    pub trials: u32,

    /// Base seed; each trial derives its own stream
    #[arg(long, env = "COCYCLE_LAB_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    /// Base seed; each trial derives its own stream
    #[arg(long, env = "COCYCLE_LAB_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    #[command(flatten)]
    pub geom: GeomArgs,

    /// Bernoulli weight of symbol 1
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,

    /// Estimate the perturbed cocycle with this marker half-length
    #[arg(long, value_name = "k=K", value_parser = parse_perturb)]
    pub perturb: Option<u32>,

    #[command(flatten)]
    pub sample: SampleArgs,
}

#[derive(Debug, Args)]
pub struct HolderArgs {
    #[command(flatten)]
    pub geom: GeomArgs,

    /// First marker half-length
    #[arg(long, default_value_t = 1)]
    pub k_min: u32,

    /// Last marker half-length
    #[arg(long, default_value_t = 4)]
    pub k_max: u32,

    /// Skip the exact enumeration and emit only the analytic bound
    #[arg(long)]
    pub bound_only: bool,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifySwapArgs {
    #[command(flatten)]
    pub geom: GeomArgs,

    /// Marker half-length
    #[arg(long, default_value_t = 1)]
    pub k: u32,

    /// Bernoulli weight of symbol 1 (used when sampling returns)
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,

    /// Control run on the unperturbed cocycle (the gate then fails)
    #[arg(long)]
    pub no_perturb: bool,

    /// Additionally check this many sampled first-return products
    #[arg(long, default_value_t = 0)]
    pub returns: u64,

    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct RegionsArgs {
    /// Diagonal stretch of the symbol-1 matrix
    #[arg(long, default_value_t = 4.0)]
    pub sigma: f64,

    /// Diagonal stretch of the symbol-0 matrix
    #[arg(long, default_value_t = 2.0)]
    pub eta: f64,

    /// Holder exponent of the regime inequalities
    #[arg(long, default_value_t = 0.4)]
    pub alpha: f64,

    /// Bernoulli weight of symbol 1
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,

    /// Sweep sigma over this range (switches to CSV grid output)
    #[arg(long, value_name = "LO:HI", value_parser = parse_range)]
    pub sigma_range: Option<(f64, f64)>,

    /// Sweep eta over this range (switches to CSV grid output)
    #[arg(long, value_name = "LO:HI", value_parser = parse_range)]
    pub eta_range: Option<(f64, f64)>,

    /// Cells per axis for the sweep
    #[arg(long)]
    pub grid_steps: Option<u32>,
}

#[derive(Debug, Args)]
pub struct KacArgs {
    /// Marker half-length
    #[arg(long, default_value_t = 1)]
    pub k: u32,

    /// Bernoulli weight of symbol 1
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,

    /// First-return excursions to sample
    #[arg(long, default_value_t = 100_000)]
    pub count: u64,

    /// Abandon a scan after this many steps
    #[arg(long, default_value_t = cocycle_lab::lyapunov::DEFAULT_RETURN_HORIZON)]
    pub horizon: u64,

    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct BunchingArgs {
    /// Diagonal stretch of the symbol-1 matrix
    #[arg(long, default_value_t = 4.0)]
    pub sigma: f64,

    /// Diagonal stretch of the symbol-0 matrix
    #[arg(long, default_value_t = 2.0)]
    pub eta: f64,

    /// Holder exponent of the bunching inequality
    #[arg(long, default_value_t = 0.4)]
    pub alpha: f64,

    /// Highest product length to test
    #[arg(long, default_value_t = 12)]
    pub n_max: u32,

    /// Test the identity cocycle instead of the base family
    #[arg(long)]
    pub identity: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// `--perturb` takes `k=K` with `K >= 1`.
pub fn parse_perturb(s: &str) -> Result<u32, String> {
    let rest = s
        .strip_prefix("k=")
        .ok_or_else(|| format!("expected k=<int>, got {s:?}"))?;
    let k: u32 = rest
        .parse()
        .map_err(|e| format!("bad marker half-length: {e}"))?;
    if k == 0 {
        return Err("marker half-length must be >= 1".into());
    }
    Ok(k)
}

/// Range flags take `LO:HI`; domain checks happen when the grid is built.
pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo: f64 = lo.parse().map_err(|e| format!("bad range start: {e}"))?;
    let hi: f64 = hi.parse().map_err(|e| format!("bad range end: {e}"))?;
    Ok((lo, hi))
}
