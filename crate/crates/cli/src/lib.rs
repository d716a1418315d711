//! `picyc` command-line pipeline: build → index → search → call, plus bench,
//! synth and merge-cycles.

mod commands;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use picyc_core::graph::GraphError;
use picyc_core::index::{Fraction, IndexError, SelectMode};
use picyc_core::search::SearchError;
use picyc_core::testkit::TestkitError;
use picyc_core::variant::VariantError;

pub use commands::{run, summary_line, BENCH_HEADER};

#[derive(Debug, Parser)]
#[command(
    name = "picyc",
    version,
    about = "Reference-free SNP discovery with colored de Bruijn graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a colored graph from a manifest of read files.
    Build(BuildArgs),
    /// Index the branching vertices of a graph.
    Index(IndexArgs),
    /// Search index entries for bubble cycles.
    Search(SearchArgs),
    /// Decompose cycles into bubbles and predict SNPs.
    Call(CallArgs),
    /// Measure cycles found per worker count under a time budget.
    Bench(BenchArgs),
    /// Simulate colored read sets with planted SNPs.
    Synth(SynthArgs),
    /// Merge cycle files from shard runs.
    MergeCycles(MergeArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ThreadArgs {
    /// Worker threads (default: available parallelism).
    #[arg(long, env = "PICYC_THREADS")]
    pub threads: Option<usize>,
}

impl ThreadArgs {
    pub fn get(&self) -> usize {
        self.threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(short = 'k', default_value_t = 63)]
    pub k: usize,
    /// Tab-separated `name<TAB>file[,file...]` per color.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub threads: ThreadArgs,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub threads: ThreadArgs,
}

/// `I/N` shard selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardSpec {
    pub id: usize,
    pub count: usize,
}

impl FromStr for ShardSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (i, n) = s.split_once('/').ok_or("expected I/N")?;
        let id: usize = i
            .trim()
            .parse()
            .map_err(|_| format!("bad shard id {i:?}"))?;
        let count: usize = n
            .trim()
            .parse()
            .map_err(|_| format!("bad shard count {n:?}"))?;
        if count == 0 || id >= count {
            return Err(format!("need 0 <= I < N, got {id}/{count}"));
        }
        Ok(ShardSpec { id, count })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SelectArg {
    Prefix,
    Strided,
}

impl From<SelectArg> for SelectMode {
    fn from(s: SelectArg) -> Self {
        match s {
            SelectArg::Prefix => SelectMode::Prefix,
            SelectArg::Strided => SelectMode::Strided,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SearchTuning {
    /// Neighborhood size cap.
    #[arg(long, default_value_t = picyc_core::search::DEFAULT_VMAX)]
    pub vmax: usize,
    #[arg(long, default_value_t = 0)]
    pub nmin: usize,
    /// Largest n searched (default: k).
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Fraction of the shard to consume, `a/b` or decimal.
    #[arg(long, default_value = "1")]
    pub fraction: Fraction,
    #[arg(long, value_enum, default_value = "strided")]
    pub select: SelectArg,
    #[arg(long, default_value = "0/1")]
    pub shard: ShardSpec,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    /// Cycles file.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-entry CSV (default: `<out>.stats.csv`).
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[command(flatten)]
    pub tuning: SearchTuning,
    #[arg(long)]
    pub budget_seconds: Option<f64>,
    #[command(flatten)]
    pub threads: ThreadArgs,
}

#[derive(Debug, Args)]
pub struct CallArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub cycles: PathBuf,
    /// Output prefix: writes `<out>.fa` and `<out>.variants.tsv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Maximum label mismatches per bubble.
    #[arg(short = 'f', default_value_t = picyc_core::variant::DEFAULT_MAX_MISMATCHES)]
    pub f: usize,
    /// Minimum interior coverage for a color to support a path.
    #[arg(long, default_value_t = picyc_core::variant::DEFAULT_CMIN)]
    pub cmin: u32,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub index: PathBuf,
    /// Comma-separated worker counts.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub workers: Vec<usize>,
    #[arg(long, default_value_t = 10.0)]
    pub budget_seconds: f64,
    #[command(flatten)]
    pub tuning: SearchTuning,
    /// CSV output (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Isolated,
    Clustered,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AssignArg {
    Split,
    Private,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub length: usize,
    #[arg(long, default_value_t = 2)]
    pub colors: usize,
    #[arg(long, default_value_t = 50)]
    pub snps: usize,
    #[arg(short = 'k', default_value_t = 21)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "isolated")]
    pub mode: ModeArg,
    /// Distance between the two variants of a cluster.
    #[arg(long, default_value_t = 2)]
    pub gap: usize,
    #[arg(long, value_enum, default_value = "split")]
    pub assignment: AssignArg,
    #[arg(long, default_value_t = 100)]
    pub read_len: usize,
    #[arg(long, default_value_t = 30)]
    pub depth: usize,
    #[arg(long, default_value_t = 0.0)]
    pub error_rate: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

/// Failure classes with their process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Mismatch(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::UnknownNode(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::FingerprintMismatch { .. } => CliError::Mismatch(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Index(e) => e.into(),
            SearchError::Mismatch(_) => CliError::Mismatch(e.to_string()),
            SearchError::UnknownSeed(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<VariantError> for CliError {
    fn from(e: VariantError) -> Self {
        match e {
            VariantError::Io { .. } => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<TestkitError> for CliError {
    fn from(e: TestkitError) -> Self {
        CliError::Input(e.to_string())
    }
}
