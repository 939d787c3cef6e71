//! `charparse` command-line tool. Data goes to files or stdout, logs to
//! stderr. Exit status: 0 on success, 1 on a usage error, 2 on a data error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "charparse", version, about = "Joint Chinese word segmentation and constituency parsing")]
struct Cli {
    /// Worker threads for parse, eval and bench (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Log filter for stderr, overridden by RUST_LOG.
    #[arg(long, global = true, default_value = "info")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Word-level trees to binarized character-level trees.
    Transform(TransformArgs),
    /// Character-level trees back to word-level trees and segmentations.
    Detransform(DetransformArgs),
    /// Train a scorer and write the best-dev checkpoint.
    Train(TrainArgs),
    /// Parse raw sentences with a checkpoint or with precomputed span scores.
    Parse(ParseArgs),
    /// Segmentation and labeled-bracket F1 of predicted against gold trees.
    Eval(EvalArgs),
    /// Decoding throughput in sentences per second.
    Bench(BenchArgs),
    /// Write a seeded synthetic treebank.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct TransformArgs {
    /// Bracketed word-level treebank.
    #[arg(long)]
    input: PathBuf,
    /// Output file (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Keep function tags such as `-SBJ` on labels.
    #[arg(long)]
    keep_function_tags: bool,
}

#[derive(Args, Debug)]
struct DetransformArgs {
    /// Character-level trees, one per line.
    #[arg(long)]
    input: PathBuf,
    /// Word-level trees (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Space-separated words, one sentence per line.
    #[arg(long)]
    segmentation: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    dev: PathBuf,
    /// Checkpoint to write.
    #[arg(long)]
    output: PathBuf,
    /// Starting hyper-parameters.
    #[arg(long, value_enum, default_value_t = Preset::Feature)]
    preset: Preset,
    /// `key = value` file applied on top of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    keep_function_tags: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    /// Linear scorer over hashed span features.
    Feature,
    /// MLP head with the encoder-setup hyper-parameters.
    Mlp,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("model").required(true).args(["checkpoint", "scores"])))]
struct ParseArgs {
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Span score file with one block per input sentence.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Raw sentences, one per line; whitespace is ignored.
    #[arg(long)]
    input: PathBuf,
    /// Word-level trees (stdout if omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    segmentation: Option<PathBuf>,
    #[command(flatten)]
    decode: DecodeFlags,
}

#[derive(Args, Debug, Clone, Copy)]
struct DecodeFlags {
    /// Allow any label on any span length.
    #[arg(long)]
    no_char_constraints: bool,
    /// Allow the null label at the root.
    #[arg(long)]
    allow_null_root: bool,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// `key=value` lines instead of a table.
    #[arg(long)]
    key_values: bool,
    #[arg(long)]
    keep_function_tags: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Corpus to parse.
    #[arg(long)]
    input: PathBuf,
    /// Whether the corpus holds raw sentences or bracketed trees.
    #[arg(long, value_enum, default_value_t = InputFormat::Raw)]
    format: InputFormat,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    /// Also time scoring plus decoding.
    #[arg(long)]
    with_scoring: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Raw,
    Trees,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Sentence lengths resembling the CTB test set instead of short ones.
    #[arg(long)]
    ctb_like: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(&cli.log_level))
        .format_timestamp(None)
        .init();

    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
