//! `csfs` — command-line toolkit for class-specific feature selection and
//! decomposable ensemble classification.
//!
//! Subcommands: `rank` (global/ova/ove/dove feature rankings), `matrix`
//! (class-specific relevance matrix from a dove table), `train` (fit a
//! classification scheme from a selection artifact), `predict`, `evaluate`
//! (stratified cross-validation with exact cost instrumentation) and `synth`
//! (seeded synthetic datasets).
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "csfs",
    version,
    about = "Class-specific feature selection and ensemble classification toolkit"
)]
pub struct Cli {
    /// Worker threads for the selection loops (default: all cores). Results
    /// do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank features: globally or per class (ova, ove, dove).
    Rank(RankArgs),
    /// Build the class-specific relevance matrix from a dove table.
    Matrix(MatrixArgs),
    /// Train a classification scheme from a selection artifact.
    Train(TrainArgs),
    /// Classify a CSV of examples with a trained scheme.
    Predict(PredictArgs),
    /// Cross-validate a full pipeline on a dataset.
    Evaluate(EvaluateArgs),
    /// Generate a seeded synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV: one header row, numeric feature columns, one label column.
    pub data: std::path::PathBuf,

    /// Label column, by header name or zero-based index (default: last).
    #[arg(long)]
    pub label: Option<String>,

    /// Missing-value handling: `mean` imputes per-feature means.
    #[arg(long, value_name = "mean")]
    pub impute: Option<String>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Relevance measure: symmetric uncertainty or normalized info gain.
    #[arg(long, default_value = "su", value_parser = ["su", "nig"])]
    pub measure: String,

    /// Number of discretization bins.
    #[arg(long, default_value_t = 5)]
    pub bins: usize,

    /// Binning method: equal width or equal frequency.
    #[arg(long, default_value = "ef", value_parser = ["ew", "ef"])]
    pub binning: String,

    /// Bin once over the whole dataset instead of per view.
    #[arg(long)]
    pub global_bins: bool,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, default_value = "ova", value_parser = ["global", "ova", "ove", "dove"])]
    pub strategy: String,

    #[command(flatten)]
    pub measure: MeasureArgs,

    /// Aggregation of pairwise scores (ove and --collapse).
    #[arg(long, default_value = "mean", value_parser = ["mean", "min", "max"])]
    pub aggregate: String,

    /// Collapse the class-specific result into one class-independent ranking.
    #[arg(long)]
    pub collapse: bool,

    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    pub format: String,

    /// Output path (default: stdout). Files are written atomically.
    #[arg(short, long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// Pairwise relevance table JSON, as produced by `rank --strategy dove`.
    pub table: std::path::PathBuf,

    /// Relevance threshold; a feature is relevant when score > tau.
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,

    #[arg(short, long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct SchemeArgs {
    #[arg(long, value_parser = ["traditional", "one-layer-ova", "two-layer-dove", "three-layer"])]
    pub topology: String,

    /// Relevance threshold used to cut rankings/tables into feature subsets.
    /// Matrix artifacts carry their own threshold.
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,

    /// Base classifier for the discriminative nodes.
    #[arg(long, default_value = "gnb", value_parser = ["gnb", "centroid"])]
    pub base: String,

    /// Variance floor of the Gaussian nodes, relative to feature scale.
    #[arg(long, default_value_t = 1e-9)]
    pub smoothing: f64,

    /// Softmax temperature of the nearest-centroid nodes.
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,

    /// Empty-feature-set nodes: keep as neutral 0.5 emitters, or omit them
    /// and renormalize.
    #[arg(long = "empty-node", default_value = "neutral", value_parser = ["neutral", "omit"])]
    pub empty_node: String,

    /// Weight of the diagonal term in the three-layer per-class average.
    #[arg(long, default_value_t = 1.0)]
    pub diag_weight: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub scheme: SchemeArgs,

    /// Selection artifact JSON (ranking, dove table, or relevance matrix).
    #[arg(long)]
    pub artifact: std::path::PathBuf,

    #[arg(short, long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Input CSV; must contain every feature column the scheme was trained
    /// on (extra columns, including a label, are ignored).
    pub data: std::path::PathBuf,

    /// Trained scheme JSON from `train`.
    #[arg(long)]
    pub scheme: std::path::PathBuf,

    #[arg(short, long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub scheme: SchemeArgs,

    /// Selection strategy (default: the conventional one for the topology).
    #[arg(long, value_parser = ["global", "ova", "ove", "dove"])]
    pub strategy: Option<String>,

    #[command(flatten)]
    pub measure: MeasureArgs,

    #[arg(long, default_value = "mean", value_parser = ["mean", "min", "max"])]
    pub aggregate: String,

    /// Number of stratified folds.
    #[arg(long, default_value_t = 5)]
    pub k: usize,

    /// Seed for fold assignment (mandatory: no silent nondeterminism).
    #[arg(long)]
    pub seed: u64,

    /// Directory to write per-fold selection artifacts into.
    #[arg(long)]
    pub dump_artifacts: Option<std::path::PathBuf>,

    /// Report JSON path (default: stdout). The human-readable table goes to
    /// stderr.
    #[arg(short, long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// `planted` (4 classes, one class-A marker, one global marker, noise)
    /// or `blobs` (separable Gaussian clusters).
    #[arg(long, default_value = "planted", value_parser = ["planted", "blobs"])]
    pub kind: String,

    #[arg(long, default_value_t = 400)]
    pub n: usize,

    /// Number of classes (blobs only).
    #[arg(long, default_value_t = 4)]
    pub classes: usize,

    /// Number of features (blobs only).
    #[arg(long, default_value_t = 4)]
    pub features: usize,

    /// How many leading features carry class signal (blobs only).
    #[arg(long, default_value_t = 2)]
    pub informative: usize,

    /// Distance between adjacent class means, in noise sigmas (blobs only).
    #[arg(long, default_value_t = 8.0)]
    pub separation: f64,

    #[arg(long)]
    pub seed: u64,

    #[arg(short, long)]
    pub output: Option<std::path::PathBuf>,
}

/// Errors split by exit code: 1 for usage problems, 2 for data problems.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let result = match cli.command {
        Command::Rank(args) => commands::rank(args),
        Command::Matrix(args) => commands::matrix(args),
        Command::Train(args) => commands::train(args),
        Command::Predict(args) => commands::predict(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Synth(args) => commands::synth(args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            match &err {
                CliError::Usage(msg) => eprintln!("error: {msg}"),
                CliError::Data(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(err.code())
        }
    }
}
