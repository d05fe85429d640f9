//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "theta-norms",
    version,
    about = "Box theta-norms, k-support and cluster norms, and their experiments"
)]
pub struct Cli {
    /// Worker threads for grid searches.
    #[arg(long, global = true, env = "THETA_NORMS_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a vector norm.
    Norm(VectorArgs),
    /// Evaluate the dual norm.
    Dual(VectorArgs),
    /// Proximity operator of half the squared norm.
    Prox(ProxArgs),
    /// Evaluate a spectral norm of a matrix.
    SpectralNorm(SpectralArgs),
    /// Matrix completion grid search from a config file.
    Complete(ConfigArgs),
    /// Multitask grid search, from a config file or the built-in generator.
    Mtl(MtlArgs),
    /// Time the prox algorithms.
    Bench(BenchArgs),
    /// Synthetic matrix completion comparison.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

/// Norm family selection shared by `norm`, `dual` and `prox`.
#[derive(Debug, Args)]
pub struct NormArgs {
    /// Box theta-norm with bounds `a`, `b` and budget `c` (or rank `k`).
    #[arg(
        long = "box",
        conflicts_with = "ksupport",
        required_unless_present = "ksupport"
    )]
    pub box_norm: bool,
    /// k-support norm.
    #[arg(long)]
    pub ksupport: bool,
    #[arg(short = 'a', allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(short = 'b', allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(short = 'c', conflicts_with = "k", allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// k-support order, or for the box norm the rank giving `c = (b − a)k + da`.
    #[arg(short = 'k', allow_negative_numbers = true)]
    pub k: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VectorArgs {
    #[command(flatten)]
    pub norm: NormArgs,
    /// Whitespace-separated vector; stdin when absent.
    #[arg(long, short = 'i')]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ProxArgs {
    #[command(flatten)]
    pub vector: VectorArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectralFamily {
    Trace,
    Ksupport,
    Box,
    Cluster,
    CenteredCluster,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[arg(long, value_enum)]
    pub norm: SpectralFamily,
    #[arg(short = 'a', allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(short = 'b', allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(short = 'c', conflicts_with = "k", allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(short = 'k', allow_negative_numbers = true)]
    pub k: Option<f64>,
    /// One matrix row per line; stdin when absent.
    #[arg(long, short = 'i')]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MtlArgs {
    #[arg(long, conflicts_with_all = ["data", "tasks"])]
    pub config: Option<PathBuf>,
    /// Multitask CSV (`task,split,target,features...`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Tasks of the built-in generator.
    #[arg(long)]
    pub tasks: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Weight of the mean penalty for centered norms.
    #[arg(long, default_value_t = 0.0)]
    pub eps_mean: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated vector lengths, ascending.
    #[arg(long, value_delimiter = ',', default_values_t = [16384usize, 32768, 65536, 131072, 262144])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 11)]
    pub repeats: usize,
    /// Repeats for the slower baseline; defaults to `--repeats`.
    #[arg(long)]
    pub baseline_repeats: Option<usize>,
    /// `k = max(1, floor(d · fraction))`.
    #[arg(long, default_value_t = 0.01, conflicts_with = "k")]
    pub k_fraction: f64,
    /// Fixed `k` at every size.
    #[arg(short = 'k')]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Lowrank,
    Block,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "lowrank")]
    pub kind: SynthKind,
    /// Matrix side.
    #[arg(long, short = 'm', default_value_t = 50)]
    pub m: usize,
    /// Rank of the low-rank matrix, or number of blocks.
    #[arg(long, default_value_t = 5)]
    pub rank: usize,
    /// Fraction of entries observed.
    #[arg(long, default_value_t = 0.2)]
    pub fraction: f64,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Comma-separated regularizer labels.
    #[arg(long, value_delimiter = ',', default_values_t = ["tr".to_string(), "ks".to_string(), "box".to_string()])]
    pub norms: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 20)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative objective change that stops the solver.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}
