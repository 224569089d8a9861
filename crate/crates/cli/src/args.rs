use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hullproj::io::{DatasetFormat, GeneratorKind};
use hullproj::SolverKind;

#[derive(Debug, Parser)]
#[command(name = "hullproj", version, about = "Closest point on the convex hull of a dataset")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project one query onto the hull of a dataset.
    Query(QueryArgs),
    /// Time the sketch solver across partition counts on a synthetic dataset.
    Bench(BenchArgs),
    /// Cross-check the solvers against exhaustive enumeration.
    Verify(VerifyArgs),
    /// Write a synthetic dataset.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Raw,
}

impl From<FormatArg> for DatasetFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => DatasetFormat::Csv,
            FormatArg::Raw => DatasetFormat::Raw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Sketch,
    Full,
    Dual,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Sketch => SolverKind::Sketch,
            SolverArg::Full => SolverKind::Full,
            SolverArg::Dual => SolverKind::Dual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    Square,
    Gaussian,
    Clustered,
}

impl From<GeneratorArg> for GeneratorKind {
    fn from(g: GeneratorArg) -> Self {
        match g {
            GeneratorArg::Square => GeneratorKind::Square,
            GeneratorArg::Gaussian => GeneratorKind::Gaussian,
            GeneratorArg::Clustered => GeneratorKind::Clustered,
        }
    }
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Dataset file.
    #[arg(long)]
    pub data: PathBuf,
    /// Dataset format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Query point: a file path, or inline coordinates such as `0.5,1`.
    #[arg(long)]
    pub query: String,
    #[arg(long, value_enum, default_value = "sketch")]
    pub solver: SolverArg,
    /// Number of sketch pieces.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub partitions: u64,
    /// KKT tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Stop the sketch early once the current iterate is optimal for all rows.
    #[arg(long)]
    pub early_exit: bool,
    /// Write the JSON record here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print a human-readable summary instead of JSON on stdout.
    #[arg(long)]
    pub table: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "clustered")]
    pub generator: GeneratorArg,
    #[arg(long, default_value_t = 20000)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub d: usize,
    /// Comma-separated partition counts.
    #[arg(long, value_delimiter = ',', default_value = "1,16")]
    pub eta_sweep: Vec<usize>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Random instances on top of the fixed corpus.
    #[arg(long, default_value_t = 200)]
    pub instances: usize,
    #[arg(long, default_value_t = 12)]
    pub max_n: usize,
    #[arg(long, default_value_t = 5)]
    pub max_d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check instances in parallel.
    #[arg(long)]
    pub parallel_instances: bool,
    /// Where to write the failing instance.
    #[arg(long, default_value = "hullproj-replay.csv")]
    pub replay_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub generator: GeneratorArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Output format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}
