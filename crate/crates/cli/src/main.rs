use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use commentweight_core::Language;

mod commands;
mod config;
mod manifest;

/// Exit status for input and validation errors.
const EXIT_INPUT: u8 = 2;
/// Exit status for NaN or other non-finite results.
const EXIT_NUMERICAL: u8 = 3;
/// Exit status when some search runs failed.
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "commentweight",
    version,
    about = "Class-imbalance aware multi-label comment classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-class positive/negative counts and positive share.
    Stats(StatsArgs),
    /// Loss weights a strategy assigns to each class.
    Weights(WeightsArgs),
    /// Train on the train split and evaluate on the test split.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset split.
    Evaluate(EvaluateArgs),
    /// Grid search over hyperparameters and weighting strategies.
    Search(SearchArgs),
    /// Combine average F1, runtime and compute into the submission score.
    Score(ScoreArgs),
}

#[derive(Args, Clone)]
struct DatasetArgs {
    /// Dataset file (.csv or .jsonl).
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_parser = parse_language)]
    language: Language,
}

fn parse_language(s: &str) -> Result<Language, String> {
    s.parse()
        .map_err(|e: commentweight_core::Error| e.to_string())
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Print machine-readable JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Write the output to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
enum SplitChoice {
    Train,
    Test,
    All,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long, value_enum, default_value = "all")]
    split: SplitChoice,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct WeightsArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// ew, icf, rbf or famo (famo prints its initial weights).
    #[arg(long)]
    strategy: String,
    /// Rows the class frequencies are taken from.
    #[arg(long, value_enum)]
    weight_stats: Option<StatsSource>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
enum StatsSource {
    Train,
    All,
}

#[derive(Args, Clone, Default)]
struct FeaturizerArgs {
    /// Hashed feature dimension (power of two).
    #[arg(long)]
    dims: Option<usize>,
    /// 1 for unigrams, 2 to add bigrams.
    #[arg(long)]
    ngram_max: Option<u8>,
    #[arg(long)]
    hash_seed: Option<u64>,
    #[arg(long)]
    no_lowercase: bool,
    #[arg(long)]
    no_l2_normalize: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Multiplier on the learning rate.
    #[arg(long)]
    lr_scale: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    #[arg(long)]
    famo_alpha: Option<f64>,
    #[arg(long)]
    famo_gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    weight_stats: Option<StatsSource>,
    /// Record per-batch losses and weights in the history.
    #[arg(long)]
    history_batches: bool,
    #[command(flatten)]
    featurizer: FeaturizerArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for checkpoint.json, history.json, report.json and report.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value = "test")]
    split: SplitChoice,
    /// Baseline report (JSON) to compute per-class F1 deltas against.
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Also write the table-shaped CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
enum SelectMode {
    /// Rank every run of every strategy together.
    Joint,
    /// Pick the best run per strategy, then compare the winners.
    PerStrategy,
}

#[derive(Args)]
struct SearchArgs {
    /// Dataset file (.csv or .jsonl); not needed with --dry-run.
    #[arg(long, required_unless_present = "dry_run")]
    dataset: Option<PathBuf>,
    #[arg(long, value_parser = parse_language, required_unless_present = "dry_run")]
    language: Option<Language>,
    /// ew, icf, rbf, famo or all.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long, value_enum)]
    select_mode: Option<SelectMode>,
    #[arg(long, env = "COMMENTWEIGHT_PARALLELISM")]
    parallelism: Option<usize>,
    #[arg(long)]
    lr_scale: Option<f64>,
    /// Base seed; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    weight_stats: Option<StatsSource>,
    /// Only print the number of configurations.
    #[arg(long)]
    dry_run: bool,
    #[command(flatten)]
    featurizer: FeaturizerArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ranked results as JSON; a CSV summary is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ScoreArgs {
    /// Average F1 as a fraction in [0, 1].
    #[arg(long)]
    f1: f64,
    /// Average runtime in seconds.
    #[arg(long)]
    runtime: f64,
    /// Average GFLOPS.
    #[arg(long)]
    gflops: f64,
    /// TOML file with the score coefficients.
    #[arg(long)]
    formula: Option<PathBuf>,
    /// General config file; its [score] table is used when --formula is absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

/// Some search runs failed; results were still written.
#[derive(Debug)]
pub struct PartialFailure(pub usize);

impl std::fmt::Display for PartialFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} search run(s) failed", self.0)
    }
}

impl std::error::Error for PartialFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<PartialFailure>().is_some() {
            return EXIT_PARTIAL;
        }
        if let Some(e) = cause.downcast_ref::<commentweight_core::Error>() {
            if e.is_numerical() {
                return EXIT_NUMERICAL;
            }
        }
    }
    EXIT_INPUT
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stats(a) => commands::stats::run(a),
        Command::Weights(a) => commands::weights::run(a),
        Command::Train(a) => commands::train::run(a),
        Command::Evaluate(a) => commands::evaluate::run(a),
        Command::Search(a) => commands::search::run(a),
        Command::Score(a) => commands::score::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
