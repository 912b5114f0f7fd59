//! Operator entry point: run the pipeline over a dataset, compare variants,
//! render traces, and tally rule effectiveness from a finished run.
//!
//! Every run leaves a self-describing directory behind: `manifest.json`
//! (settings plus dataset digest, written before the first model call),
//! `traces/` with one file per problem, `reports/` with the summary and CSV
//! tables, and `cache/` with recorded model responses. A directory like that
//! can be replayed offline with `--backend replay`.

mod inspect;
mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::agents::TemplateError;
use crate::bench::{DatasetError, EvalError, ReportError};
use crate::llm::LlmError;
use crate::pipeline::{TraceError, Variant};

pub use inspect::{cmd_analyze_rules, cmd_trace};
pub use run::{cmd_ablate, cmd_run, RunManifest};

/// Anything that aborts a command. Per-problem pipeline failures are data,
/// not errors; only configuration, dataset, and infrastructure trouble
/// lands here.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("dataset error: {0}")]
    Dataset(#[from] DatasetError),
    #[error("template error: {0}")]
    Template(#[from] TemplateError),
    #[error("backend error: {0}")]
    Llm(#[from] LlmError),
    #[error("trace error: {0}")]
    Trace(#[from] TraceError),
    #[error("report error: {0}")]
    Report(#[from] ReportError),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Exit code for the process; mirrors clap's own usage-error code.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Where model responses come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    /// Canned responses from a scenario file; no network.
    Scripted,
    /// Chat-completions server named by `SPECINE_API_BASE`.
    Http,
    /// Previously recorded cache only; a miss is an error.
    Replay,
}

impl BackendKind {
    pub fn tag(self) -> &'static str {
        match self {
            BackendKind::Scripted => "scripted",
            BackendKind::Http => "http",
            BackendKind::Replay => "replay",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "specine", version, about = "Align model-perceived specifications with code")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pipeline over a dataset and write a run directory.
    Run(RunArgs),
    /// Run several variants over the same dataset and compare them.
    Ablate(AblateArgs),
    /// Render a recorded trace as a human-readable timeline.
    Trace(TraceArgs),
    /// Tally rule retention over the traces of a finished run.
    AnalyzeRules(AnalyzeRulesArgs),
}

/// Settings shared by `run` and `ablate`; flags mirror the pipeline
/// configuration one field at a time.
#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Dataset file, one JSON problem per line.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Run directory to create; holds manifest, traces, reports, cache.
    #[arg(long)]
    pub out: PathBuf,
    /// Maximum alignment iterations after a failed gate.
    #[arg(long, default_value_t = 10)]
    pub iterations: u32,
    /// Pipeline variant: full, woPTC, woT, wTF, woA, or woAR.
    #[arg(long, default_value = "full")]
    pub variant: Variant,
    /// Tests requested from the tester during identification.
    #[arg(long, default_value_t = 5)]
    pub tester_k: u32,
    /// Wall-clock seconds allowed per executed test.
    #[arg(long, default_value_t = 10)]
    pub timeout: u64,
    /// Base seed for every per-problem random stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = BackendKind::Http)]
    pub backend: BackendKind,
    /// Scenario file for the scripted backend.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Response cache file; defaults to cache/responses.bin inside the run
    /// directory. Replay runs read it, live runs record into it.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Problems run through the pipeline at the same time.
    #[arg(long, default_value_t = 1)]
    pub parallelism: usize,
    /// Problems judged against private tests at the same time; defaults to
    /// the pipeline parallelism.
    #[arg(long)]
    pub judge_parallelism: Option<usize>,
    /// Interpreter the generated programs target: python3 or sh.
    #[arg(long, default_value = "python3")]
    pub lang: String,
    /// Model name sent to the backend; falls back to SPECINE_MODEL.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, default_value_t = 1024)]
    pub max_tokens: u32,
    #[arg(long, default_value_t = 0.8)]
    pub temperature: f64,
    /// Keep only this many problems, sampled per difficulty stratum.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Move this many private tests per problem into the public set.
    #[arg(long)]
    pub carve: Option<usize>,
    /// Directory of prompt template files overriding the built-ins.
    #[arg(long)]
    pub templates: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Variants to compare; all six when omitted.
    #[arg(long, value_delimiter = ',')]
    pub variants: Vec<Variant>,
}

#[derive(Debug, clap::Args)]
pub struct TraceArgs {
    /// A trace file, or a run directory holding traces/.
    pub path: PathBuf,
    /// Problem to render when the path is a run directory.
    #[arg(long)]
    pub problem: Option<String>,
}

#[derive(Debug, clap::Args)]
pub struct AnalyzeRulesArgs {
    /// Run directory holding traces/.
    pub run_dir: PathBuf,
}

/// Dispatches a parsed command line; output goes to stdout, problems come
/// back as errors for the binary to report.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => cmd_run(&args).map(|_| ()),
        Command::Ablate(args) => cmd_ablate(&args),
        Command::Trace(args) => cmd_trace(&args),
        Command::AnalyzeRules(args) => cmd_analyze_rules(&args),
    }
}
