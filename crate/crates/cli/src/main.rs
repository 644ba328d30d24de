use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Exit statuses shared by all subcommands.
pub mod exit {
    pub const USAGE_OR_IO: u8 = 1;
    pub const PRECONDITION: u8 = 2;
    pub const POLICY_REFUSAL: u8 = 3;
}

/// Rotation-based privacy-preserving transformation and clustering.
#[derive(Debug, Parser)]
#[command(name = "ppclust", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate i.i.d. Gaussian data.
    Gen(GenArgs),
    /// Normalize each attribute of a dataset.
    Normalize(NormalizeArgs),
    /// Rotate a dataset with RBT, MRBT or ARBT.
    Transform(TransformArgs),
    /// Release the unification angle between two subsets (client side).
    Release(ReleaseArgs),
    /// Unify two transformed subsets and cluster the result (server side).
    Unify(UnifyArgs),
    /// Cluster a dataset or a single transformed block with k-means.
    Cluster(ClusterArgs),
    /// Run a timing experiment.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    a: usize,
    #[arg(long, default_value_t = 100.0)]
    mu: f64,
    /// Variance of every attribute.
    #[arg(long = "var", default_value_t = 100.0)]
    var: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    MinMax,
    ZScore,
    UnaryMax,
}

#[derive(Debug, Args)]
struct NormalizeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::MinMax)]
    method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scheme {
    Rbt,
    Mrbt,
    Arbt,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Directory receiving the block CSVs and manifest.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    scheme: Scheme,
    /// Number of subsets (MRBT/ARBT).
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Master seed; subset seeds are derived from it.
    #[arg(long)]
    seed: u64,
    /// Where the client-side secrets go (MRBT/ARBT). Must lie outside `--out`.
    #[arg(long)]
    secrets: Option<PathBuf>,
    /// Release ledger to initialize (ARBT); defaults to `<secrets>.ledger`.
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReleaseArgs {
    #[arg(long)]
    secrets: PathBuf,
    /// Created with the secrets' subset count if missing.
    #[arg(long)]
    ledger: PathBuf,
    #[arg(long)]
    i: usize,
    #[arg(long)]
    j: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitArg {
    Random,
    Sequential,
}

#[derive(Debug, Args)]
struct KMeansArgs {
    #[arg(long, default_value_t = 7)]
    k: usize,
    #[arg(long, value_enum, default_value_t = InitArg::Random)]
    init: InitArg,
    /// Seed for random initialization.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "max-iter", default_value_t = 100)]
    max_iter: usize,
    /// Fraction of records allowed to move when stopping.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
}

#[derive(Debug, Args)]
struct UnifyArgs {
    /// Directory written by `transform`.
    #[arg(long)]
    blocks: PathBuf,
    #[arg(long)]
    i: usize,
    #[arg(long)]
    j: usize,
    /// The released unification angle, in degrees.
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    kmeans: KMeansArgs,
    /// Output directories of `cluster` for blocks i and j.
    #[arg(long = "warm-start", num_args = 2, value_names = ["DIR_I", "DIR_J"])]
    warm_start: Option<Vec<PathBuf>>,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    /// Dataset or block CSV.
    #[arg(long = "in")]
    input: PathBuf,
    /// Directory receiving clusters.csv and centroids.csv.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    kmeans: KMeansArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// One of 1, 2, 3, 4, 5, 7, 10.
    #[arg(long)]
    experiment: u32,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    /// Repetitions for experiment 2.
    #[arg(long = "filter-reps", default_value_t = 500)]
    filter_reps: usize,
    #[arg(long, default_value_t = 3)]
    warmup: usize,
    /// `start:end:step` or a comma-separated list of record counts.
    #[arg(long, default_value = "3125:46875:3125")]
    ladder: String,
    #[arg(long, default_value_t = 4)]
    attrs: usize,
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 7)]
    k: usize,
    /// Records of the synthetic dataset of experiment 4.
    #[arg(long = "synthetic-n", default_value_t = 1_000_000)]
    synthetic_n: usize,
    #[arg(long = "synthetic-a", default_value_t = 10)]
    synthetic_a: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::USAGE_OR_IO)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("ppclust: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
