//! `fuzzymon`: simulate, split, train, evidence, odd and benchmark.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or parse error,
//! 3 acceptance failure (low accuracy or an unacceptable safety case).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fuzzymon", version, about = "Learn and evaluate interpretable fuzzy perception monitors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic record file from a scenario.
    Simulate(SimulateArgs),
    /// Split a record file into training and validation parts by episode.
    Split(SplitArgs),
    /// Train (or continue training) a fuzzy monitor.
    Train(TrainArgs),
    /// Per-cloud evidence, shortlist and safety case.
    Evidence(EvidenceArgs),
    /// Derive or apply an ODD specification.
    #[command(subcommand)]
    Odd(OddCommand),
    /// Score the fuzzy monitor and baselines on validation data.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario JSON; the built-in driving scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<u32>,
    /// Record file (`.csv` for CSV, JSON-lines otherwise).
    #[arg(long)]
    out: PathBuf,
    /// Also write the scenario's feature schema here.
    #[arg(long)]
    schema_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.7)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    val_out: PathBuf,
}

#[derive(Debug, Args)]
struct Thresholds {
    #[arg(long)]
    omega0: Option<f64>,
    #[arg(long)]
    merge_threshold: Option<f64>,
    #[arg(long)]
    util_threshold: Option<f64>,
    #[arg(long)]
    min_support: Option<u64>,
    #[arg(long)]
    window: Option<usize>,
    /// Acceptable windowed accuracy.
    #[arg(long)]
    accuracy_target: Option<f64>,
    #[arg(long)]
    var_floor_ratio: Option<f64>,
    #[arg(long)]
    belonging_threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Feature schema JSON (required unless resuming).
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    data: PathBuf,
    /// Model state file to write.
    #[arg(long)]
    model: PathBuf,
    /// Continue from the state already stored at `--model`.
    #[arg(long)]
    resume: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    thresholds: Thresholds,
    #[arg(long, default_value_t = 1000)]
    log_every: u64,
    /// Exit 0 even when the final windowed accuracy misses the target.
    #[arg(long)]
    allow_low_accuracy: bool,
    /// Skip malformed lines instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct ShortlistArgs {
    /// Confidence level (percent) of the sampling error.
    #[arg(long, default_value_t = 99.0)]
    q: f64,
    /// Largest acceptable misperception rate including the sampling error.
    #[arg(long, default_value_t = 0.1)]
    max_mp_rate: f64,
}

#[derive(Debug, Args)]
struct EvidenceArgs {
    #[arg(long)]
    model: PathBuf,
    /// Recount evidence on this dataset instead of the training tallies.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    shortlist: ShortlistArgs,
    #[arg(long, default_value_t = 1e-3)]
    gamma_c: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma_cr: f64,
    /// Speed in km/h.
    #[arg(long, default_value_t = 40.0)]
    speed: f64,
    /// Camera frame rate in frames per second.
    #[arg(long, default_value_t = 10.0)]
    fps: f64,
    /// Distance between stopped-car-ahead encounters in metres.
    #[arg(long, default_value_t = 500.0)]
    spacing: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Debug, Subcommand)]
enum OddCommand {
    /// Derive a specification from a trained model.
    Derive(OddDeriveArgs),
    /// Filter a record file with a specification.
    Check(OddCheckArgs),
}

#[derive(Debug, Args)]
struct OddDeriveArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    shortlist: ShortlistArgs,
    /// Membership at which an exclude block applies.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value = "visibility")]
    group: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct OddCheckArgs {
    #[arg(long)]
    odd: PathBuf,
    /// Feature schema JSON.
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Records inside the ODD.
    #[arg(long)]
    out: PathBuf,
    /// JSON summary with the retention fraction.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[arg(long)]
    model: PathBuf,
    /// Training split for the baselines.
    #[arg(long)]
    train: PathBuf,
    /// Validation records to score.
    #[arg(long)]
    data: PathBuf,
    /// Only score records inside this ODD.
    #[arg(long)]
    odd: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    random_p: f64,
    #[arg(long, default_value_t = 5)]
    tree_depth: usize,
    #[arg(long, default_value_t = 5)]
    min_leaf: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            log::error!("{:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
