//! The `imaze` command line: argument parsing, run manifests and dispatch.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod server;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use imaze_core::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "imaze", version, about = "Targeted syntactic evaluation and Interpolated Maze analysis")]
pub struct Cli {
    /// Seed for every stochastic step (overrides `seed` in the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` in the config; default `.`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test-suite checks.
    #[command(subcommand)]
    Suite(SuiteCmd),
    /// Word-level surprisal tables.
    #[command(subcommand)]
    Surprisal(SurprisalCmd),
    /// Accuracy and consistency scores.
    #[command(subcommand)]
    Score(ScoreCmd),
    /// Reading-time regressions and derived analyses.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Maze materials.
    #[command(subcommand)]
    Maze(MazeCmd),
    /// Synthetic data with a known generating process.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Result-collection server for the browser runner.
    Serve(ServeArgs),
    /// Plot-ready tables.
    #[command(subcommand)]
    Export(ExportCmd),
    /// Re-executes the command recorded in a manifest and checks its outputs.
    Rerun {
        manifest: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SuitesArg {
    /// Suite files or directories of `*.json` suites.
    #[arg(long, alias = "suite", num_args = 1..)]
    pub suites: Vec<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SuiteCmd {
    /// Reports every structural violation; fails if there is any.
    Validate {
        #[command(flatten)]
        suites: SuitesArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum SurprisalCmd {
    /// Aligns per-token surprisals from an external model to words.
    Ingest {
        #[command(flatten)]
        suites: SuitesArg,
        /// Token TSV: suite_tag, item_id, condition, token_index, token, surprisal_bits.
        #[arg(long)]
        tokens: PathBuf,
        #[arg(long)]
        provider: String,
        #[arg(long)]
        join_marker: Option<String>,
        #[arg(long = "skip-token")]
        skip_tokens: Vec<String>,
    },
    /// Trains the reference n-gram model and a frequency table on a corpus.
    NgramTrain {
        /// One sentence per line, whitespace-tokenized.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 0.75)]
        discount: f64,
        #[arg(long)]
        no_normalize: bool,
    },
    /// Scores every suite sentence with a trained n-gram model.
    Score {
        #[command(flatten)]
        suites: SuitesArg,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "ngram")]
        provider: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum ScoreCmd {
    /// Model accuracy from a surprisal table.
    Accuracy {
        #[command(flatten)]
        suites: SuitesArg,
        #[arg(long)]
        surprisal: PathBuf,
        /// Defaults to the table's file name without `surprisal.` and `.tsv`.
        #[arg(long)]
        provider: Option<String>,
        #[arg(long)]
        aggregation: Option<String>,
    },
    /// Human consistency from an RT log.
    Consistency {
        #[command(flatten)]
        suites: SuitesArg,
        #[arg(long)]
        rt_log: Option<PathBuf>,
        #[arg(long)]
        aggregation: Option<String>,
        #[arg(long)]
        max_rt: Option<f64>,
    },
    /// Pearson correlation of per-suite model accuracy and human consistency.
    Correlate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        human: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    L,
    G,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    All,
    Critical,
    NonCritical,
}

#[derive(Debug, Clone, Args)]
pub struct TrialInputs {
    #[command(flatten)]
    pub suites: SuitesArg,
    #[arg(long)]
    pub rt_log: Option<PathBuf>,
    /// Word frequency TSV (from `surprisal ngram-train`).
    #[arg(long)]
    pub freq: Option<PathBuf>,
    #[arg(long)]
    pub max_rt: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCmd {
    /// Linear RT model on surprisal, log frequency and length.
    Fit {
        #[command(flatten)]
        inputs: TrialInputs,
        #[arg(long)]
        surprisal: PathBuf,
        #[arg(long)]
        provider: Option<String>,
        #[arg(long, value_enum, default_value_t = KindArg::L)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = ScopeArg::All)]
        scope: ScopeArg,
        #[arg(long)]
        participant_offsets: bool,
        #[arg(long)]
        item_offsets: bool,
    },
    /// Observed vs surprisal-predicted slowdowns per suite prediction.
    Slowdown {
        #[command(flatten)]
        inputs: TrialInputs,
        /// Fit files; paired in order with `--surprisal`.
        #[arg(long, num_args = 1..)]
        fit: Vec<PathBuf>,
        #[arg(long, num_args = 1..)]
        surprisal: Vec<PathBuf>,
        #[arg(long)]
        n_boot: Option<usize>,
        #[arg(long)]
        level: Option<f64>,
    },
    /// Residuals of a non-critical fit, by region type and grammaticality.
    Residuals {
        #[command(flatten)]
        inputs: TrialInputs,
        #[arg(long)]
        fit: PathBuf,
        #[arg(long)]
        surprisal: PathBuf,
    },
    /// Fraction of predictions within the human interval as the slope is scaled.
    Sweep {
        #[arg(long)]
        slowdown: PathBuf,
        /// `a:b` (integers a..=b), `a:b:step` or a comma list.
        #[arg(long, default_value = "1:30")]
        scalars: String,
    },
    /// Pairwise provider comparison of critical-region |residual|.
    Compare {
        /// Residual tables (`residuals.<provider>.tsv`).
        #[arg(long, num_args = 2..)]
        residuals: Vec<PathBuf>,
    },
    /// Non-critical RTs on L-Maze vs G-Maze decisions.
    LmazeContrast {
        #[arg(long)]
        rt_log: Option<PathBuf>,
        #[arg(long)]
        max_rt: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum MazeCmd {
    /// Interpolated Maze materials for every suite sentence.
    Generate {
        #[command(flatten)]
        suites: SuitesArg,
        /// n-gram model JSON used to pick G-Maze distractors.
        #[arg(long)]
        model: PathBuf,
        /// Frequency table; its words form the lexicon.
        #[arg(long)]
        freq: Option<PathBuf>,
        /// Extra lexicon words, one per line.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = 0.25)]
        rate: f64,
        #[arg(long, default_value_t = 2)]
        char_order: usize,
        #[arg(long, default_value_t = 0.1)]
        char_smoothing: f64,
        #[arg(long, default_value_t = 7.0)]
        ceiling_bits: f64,
        #[arg(long, default_value_t = 1000)]
        max_tries: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum SimulateCmd {
    /// RT log from a known linear law over a surprisal table.
    RtLog {
        #[command(flatten)]
        suites: SuitesArg,
        #[arg(long)]
        surprisal: PathBuf,
        #[arg(long)]
        freq: Option<PathBuf>,
        /// Materials bundle supplying distractors and their kinds.
        #[arg(long)]
        materials: Option<PathBuf>,
        #[arg(long)]
        participants: Option<usize>,
        #[arg(long)]
        ms_per_bit: Option<f64>,
        #[arg(long)]
        effect_ms: Option<f64>,
        #[arg(long)]
        noise_sd: Option<f64>,
        #[arg(long)]
        error_rate: Option<f64>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// Store directory for materials, uploads and RT logs.
    #[arg(long, env = "IMAZE_DATA_DIR")]
    pub data_dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
    /// Bundles to register before serving.
    #[arg(long)]
    pub materials: Vec<PathBuf>,
    /// Directory holding the runner's `index.html`.
    #[arg(long)]
    pub runner: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExportCmd {
    /// Accuracy bars, slowdown bars and sweep curves.
    Plots {
        /// Accuracy reports (`accuracy.<provider>.tsv`).
        #[arg(long, num_args = 1..)]
        accuracy: Vec<PathBuf>,
        /// Human consistency report, plotted as provider `human`.
        #[arg(long)]
        consistency: Option<PathBuf>,
        #[arg(long)]
        slowdown: Option<PathBuf>,
        #[arg(long)]
        sweep: Option<PathBuf>,
    },
}

/// One line: `error<TAB>kind<TAB>message`.
pub fn error_line(e: &Error) -> String {
    let message = e.to_string().replace(['\n', '\t'], " ");
    format!("error\t{}\t{message}", e.kind())
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run(argv: &[String]) -> Result<()> {
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::InvalidArgument(e.to_string().replace('\n', " ")))?;
    commands::execute(cli, argv.get(1..).unwrap_or_default().to_vec())
}
