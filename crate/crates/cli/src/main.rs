//! `polarkit` command-line interface.

mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polarkit::Subtask;

#[derive(Debug, Parser)]
#[command(name = "polarkit", version, about = "Polarization corpus toolkit")]
struct Cli {
    /// Log progress at info level (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Duplicate and transform a share of the training records.
    Augment(AugmentArgs),
    /// Merge training and development data and drop duplicate texts.
    Assemble(AssembleArgs),
    /// Draw the validation set and write the remaining training records.
    Sample(SampleArgs),
    /// Score predictions against gold labels per language.
    Score(ScoreArgs),
    /// Subtract a baseline score table from ours.
    Delta(DeltaArgs),
    /// Percentage of leaderboard systems scoring strictly below a score.
    Percentile(PercentileArgs),
    /// Logistic regression over feature vectors.
    #[command(subcommand)]
    Lr(LrCommand),
    /// Print the finetuning configuration for a subtask.
    EmitConfig(EmitConfigArgs),
}

fn parse_subtask(s: &str) -> Result<Subtask, String> {
    s.parse().map_err(|e: polarkit::Error| e.to_string())
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Seed for every random choice in the run.
    #[arg(long, default_value_t = polarkit::seed::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug, Args)]
struct AugmentArgs {
    /// Training records (JSONL).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_subtask)]
    subtask: Subtask,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Share of the input duplicated in total, split evenly over the techniques.
    #[arg(long, default_value_t = 0.20)]
    total_frac: f64,
    /// Override one technique's share, as TECHNIQUE=FRACTION (repeatable).
    #[arg(long, value_name = "TECHNIQUE=FRACTION")]
    per_technique_frac: Vec<String>,
    /// Probability of replacing each mappable character.
    #[arg(long, default_value_t = polarkit::augment::DEFAULT_HOMOGLYPH_RATE)]
    homoglyph_rate: f64,
    /// Confusables table (TSV). Defaults to $POLARKIT_CONFUSABLES, then the built-in table.
    #[arg(long)]
    confusables: Option<PathBuf>,
    /// Augment subtask 2 or 3 data, which is not augmented by default.
    #[arg(long)]
    allow_multilabel: bool,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug, Args)]
struct AssembleArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    dev: PathBuf,
    #[arg(long, value_parser = parse_subtask)]
    subtask: Subtask,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    /// A fixed number of records per language and label.
    Binary,
    /// A fixed number of records per language, following label frequencies.
    Distributional,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Merged pool (JSONL), usually the output of `assemble`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_subtask)]
    subtask: Subtask,
    #[arg(long)]
    out: PathBuf,
    /// Sampling mode; binary for subtask 1, distributional otherwise.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, default_value_t = polarkit::assemble::DEFAULT_PER_CELL)]
    per_cell: usize,
    /// Comma-separated languages that must be sampled (default: all present).
    #[arg(long, value_delimiter = ',')]
    languages: Option<Vec<String>>,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Predictions (JSONL with `id` and `scores`).
    #[arg(long)]
    pred: PathBuf,
    /// Gold records (JSONL).
    #[arg(long)]
    gold: PathBuf,
    #[arg(long, value_parser = parse_subtask)]
    subtask: Subtask,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DeltaArgs {
    /// Our scores: CSV with a `language` column.
    #[arg(long)]
    mine: PathBuf,
    /// Baseline scores with the same languages and columns.
    #[arg(long)]
    baseline: PathBuf,
    /// Also write delta.csv and a manifest here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PercentileArgs {
    /// Our score, which must appear on the leaderboard.
    #[arg(long)]
    mine: f64,
    /// Leaderboard CSV with a `system,score` header.
    #[arg(long)]
    leaderboard: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum LrCommand {
    /// Fit a model on all given features.
    Train(LrTrainArgs),
    /// Per language: split 80/20, fit, and score the held-out part.
    Eval(LrEvalArgs),
    /// Apply a trained model to features.
    Predict(LrPredictArgs),
}

#[derive(Debug, Args)]
struct LrDataArgs {
    /// Feature vectors (JSONL with `id`, `lang`, `values`).
    #[arg(long)]
    features: PathBuf,
    /// Gold records (JSONL) labeling every feature id.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, value_parser = parse_subtask)]
    subtask: Subtask,
    #[arg(long)]
    out: PathBuf,
    /// L2 regularisation strength.
    #[arg(long, default_value_t = 1.0)]
    l2: f64,
    #[arg(long, default_value_t = 100)]
    max_epochs: usize,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug, Args)]
struct LrTrainArgs {
    #[command(flatten)]
    data: LrDataArgs,
    /// Train on one language only.
    #[arg(long)]
    lang: Option<String>,
    /// Description of where the features came from, stored in the model.
    #[arg(long)]
    provenance: Option<String>,
}

#[derive(Debug, Args)]
struct LrEvalArgs {
    #[command(flatten)]
    data: LrDataArgs,
}

#[derive(Debug, Args)]
struct LrPredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_parser = parse_subtask)]
    subtask: Subtask,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EmitConfigArgs {
    #[arg(long, value_parser = parse_subtask)]
    subtask: Subtask,
    /// Write training_config.json and a manifest here instead of printing.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Why a run stopped: bad invocation (exit 1) or bad data (exit 2).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(polarkit::Error),
}

impl Failure {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Failure::Data(polarkit::Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

impl From<polarkit::Error> for Failure {
    fn from(e: polarkit::Error) -> Self {
        Failure::Data(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
