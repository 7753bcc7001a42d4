use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use equilox::models::Formulation;

#[derive(Debug, Parser)]
#[command(name = "equilox", version, about = "Equity-aware relief prepositioning models")]
pub struct Cli {
    /// Log filter, env_logger syntax (`info`, `equilox=debug`, ...).
    #[arg(long, global = true, default_value = "warn,highs=error", env = "EQUILOX_LOG")]
    pub log: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one formulation on an instance and write the plan and metrics.
    Run(RunArgs),
    /// Solve each formulation, then evaluate the plans on sampled demand.
    Simulate(SimulateArgs),
    /// Check an instance file and list every problem found.
    Validate(ValidateArgs),
    /// Write a formulation as MPS or LP text without solving it.
    Export(ExportArgs),
}

pub fn parse_formulation(s: &str) -> Result<Formulation, String> {
    s.parse()
}

pub fn parse_cluster_count(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("cluster counts must be positive".into()),
        Ok(k) => Ok(k),
        Err(_) => Err(format!("bad cluster count {s:?}")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveFlags {
    /// Wall-clock limit per solve, in seconds.
    #[arg(long, default_value_t = 3600.0)]
    pub time_limit: f64,
    /// Relative optimality gap at which the MIP stops.
    #[arg(long, default_value_t = 1e-5)]
    pub gap: f64,
    /// Solver threads per solve.
    #[arg(long, default_value_t = 1)]
    pub threads: u32,
    /// Seed for the solver, sampling and clustering.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Single-threaded solves with pinned seeds.
    #[arg(long)]
    pub repro: bool,
    /// External solver executable (HiGHS or CBC); in-process HiGHS otherwise.
    #[arg(long, env = "EQUILOX_SOLVER")]
    pub solver_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelFlags {
    /// Drop the upper-bounding Lorenz inequality from the gini formulation.
    #[arg(long)]
    pub no_valid_inequality: bool,
    /// Cluster counts per scenario for ginic, e.g. `1,2,3`.
    #[arg(long, value_delimiter = ',', value_parser = parse_cluster_count)]
    pub clusters: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Instance JSON, or the name of a bundled instance (serrana, tiny).
    pub instance: String,
    /// sp, gmd, gini or ginic.
    #[arg(value_parser = parse_formulation)]
    pub formulation_pos: Option<Formulation>,
    #[arg(long, value_parser = parse_formulation, conflicts_with = "formulation_pos")]
    pub formulation: Option<Formulation>,
    /// Solve the LP relaxation and report its value only.
    #[arg(long)]
    pub lp_relax: bool,
    /// Output directory; defaults to `out/<timestamp>-<formulation>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solve: SolveFlags,
    #[command(flatten)]
    pub model: ModelFlags,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub instance: String,
    /// Comma-separated formulations.
    #[arg(long, value_delimiter = ',', value_parser = parse_formulation, default_value = "sp,gmd,gini,ginic")]
    pub formulations: Vec<Formulation>,
    /// Number of sampled realizations.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Worker threads for per-realization solves.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Draw real-valued demands (rounded) instead of integer-uniform ones.
    #[arg(long)]
    pub continuous_sampling: bool,
    /// Re-solve every realization for plain effectiveness.
    #[arg(long)]
    pub plain_effectiveness: bool,
    /// Time limit per realization for gini and ginic (others use --time-limit).
    #[arg(long, default_value_t = equilox::sim::RANKING_REALIZATION_TIME_LIMIT_S)]
    pub realization_time_limit: f64,
    /// Solution cache root; defaults to the output directory.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, conflicts_with = "cache_dir")]
    pub no_cache: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solve: SolveFlags,
    #[command(flatten)]
    pub model: ModelFlags,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub instance: String,
    /// Output directory for the manifest; defaults to `out/<timestamp>-validate`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Mps,
    FixedMps,
    Lp,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub instance: String,
    #[arg(value_parser = parse_formulation)]
    pub formulation: Formulation,
    #[arg(long, value_enum, default_value = "mps")]
    pub format: ExportFormat,
    /// Model file to write.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub model: ModelFlags,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
