mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "lexlink", version, about = "Word-to-word translation lexicon induction")]
struct Cli {
    /// Worker threads for all parallel work (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Induce a model from a sentence-aligned bitext.
    Induce(InduceArgs),
    /// Export a thresholded lexicon TSV from a model.
    Lexicon(LexiconArgs),
    /// Link a bitext with a model and write token links as TSV.
    Link(LinkArgs),
    /// Adjudication and ground-truth evaluation.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Generate a synthetic bitext with a known lexicon.
    Synth(SynthArgs),
}

#[derive(Subcommand, Debug)]
enum EvalCommand {
    /// Sample link types into an adjudication bundle.
    Sample(SampleArgs),
    /// Score a judgment set against its bundle.
    Score(ScoreArgs),
    /// Precision/recall against ground truth over likelihood thresholds.
    Curve(CurveArgs),
}

#[derive(Args, Debug, Serialize)]
struct TokenizerFlags {
    /// Keep letter case.
    #[arg(long)]
    no_lowercase: bool,
    /// Keep hyphenated words whole.
    #[arg(long)]
    no_split_hyphens: bool,
}

#[derive(Args, Debug, Serialize)]
struct InduceArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Model output path.
    #[arg(long, short)]
    output: PathBuf,
    /// TOML configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    source_function_words: Option<PathBuf>,
    #[arg(long)]
    target_function_words: Option<PathBuf>,
    /// Likelihood-ratio cutoff (not log).
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    max_segment_len: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write every evaluated parameter-search point as TSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    tokenizer: TokenizerFlags,
}

#[derive(Args, Debug, Serialize)]
struct LexiconArgs {
    #[arg(long)]
    model: PathBuf,
    /// Likelihood-ratio threshold (not log); defaults to the model cutoff.
    #[arg(long)]
    threshold: Option<f64>,
    /// Output path; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct LinkArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Function-word lists; default to the ones recorded in the model.
    #[arg(long)]
    source_function_words: Option<PathBuf>,
    #[arg(long)]
    target_function_words: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Keep entries with likelihood ratio at least this (not log).
    #[arg(long, conflicts_with = "top")]
    threshold: Option<f64>,
    /// Keep the N highest-scoring entries.
    #[arg(long)]
    top: Option<usize>,
    #[arg(long, default_value_t = 5)]
    sets: usize,
    #[arg(long, default_value_t = 100)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Concordance lines per item.
    #[arg(long, default_value_t = 5)]
    contexts: usize,
    #[arg(long, short)]
    output: PathBuf,
    #[command(flatten)]
    tokenizer: TokenizerFlags,
}

#[derive(Args, Debug, Serialize)]
struct ScoreArgs {
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long)]
    judgments: PathBuf,
    /// Report path; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CurveArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Comma-separated ln L thresholds; a geometric grid when absent.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10)]
    points: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    #[arg(long, default_value_t = 500)]
    entries: usize,
    #[arg(long, default_value_t = 5000)]
    segments: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    collocations: usize,
    #[arg(long, default_value_t = 1.0)]
    zipf_exponent: f64,
    #[arg(long, default_value_t = 5)]
    min_len: usize,
    #[arg(long, default_value_t = 15)]
    max_len: usize,
    #[arg(long, default_value_t = 0.1)]
    function_fraction: f64,
    /// Directory for source.txt, target.txt, truth.json and the
    /// function-word lists.
    #[arg(long, short)]
    output: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or_default();
            eprintln!("{}", CliError::new("usage", first.trim_start_matches("error: ")));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> error::CliResult {
    if !matches!(cli.command, Command::Induce(_)) {
        commands::init_threads(cli.threads.unwrap_or(0))?;
    }
    match cli.command {
        Command::Induce(args) => commands::induce(args, cli.threads),
        Command::Lexicon(args) => commands::lexicon(args),
        Command::Link(args) => commands::link(args),
        Command::Eval(EvalCommand::Sample(args)) => commands::sample(args),
        Command::Eval(EvalCommand::Score(args)) => commands::score(args),
        Command::Eval(EvalCommand::Curve(args)) => commands::curve(args),
        Command::Synth(args) => commands::synth(args),
    }
}
