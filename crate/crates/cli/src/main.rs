//! `metaqa`: ingest World Bank data, generate questions, run tool-calling
//! models on them, and score the transcripts.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use metaqa_core::templates::{Mode, TemplateId};
use metaqa_core::tools::ToolMode;
use metaqa_core::wb_data::{RegionLevel, YearRange, DEFAULT_API_BASE};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "metaqa", version, about = "Multi-step tool-use question answering over World Bank data")]
struct Cli {
    /// Log more (-v debug, -vv trace). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Download featured indicators, countries and values into a data directory.
    Ingest(IngestArgs),
    /// Add three paraphrases to every indicator that has none.
    Paraphrase(ParaphraseArgs),
    /// Write a built-in synthetic data directory (plus an M49 file) for offline use.
    Synth(SynthArgs),
    /// Instantiate question templates into a JSONL dataset.
    Generate(GenerateArgs),
    /// Run a chat model on every question, writing one transcript per question.
    Run(RunArgs),
    /// Score transcripts against the dataset.
    Score(ScoreArgs),
    /// Aggregate score files into markdown and CSV tables.
    Report(ReportArgs),
    /// Replay each question's essential actions and check for perfect scores.
    ReplayOracle(ReplayArgs),
    /// Print the number of values available for each slot type.
    Inventory(InventoryArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long, default_value = DEFAULT_API_BASE)]
    api_base: String,
    /// M49 tabulation: file path or http(s) URL.
    #[arg(long)]
    m49: String,
    #[arg(long, default_value_t = YearRange::DEFAULT)]
    years: YearRange,
    /// Extra query string for the indicator listing (e.g. a source filter).
    #[arg(long, default_value = "")]
    indicator_query: String,
    /// JSON object mapping country aliases to canonical names.
    #[arg(long)]
    aliases: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    levels: LevelArgs,
}

#[derive(Args)]
struct ProviderArgs {
    /// Base URL of an OpenAI-compatible endpoint (".../v1").
    #[arg(long)]
    base_url: String,
    #[arg(long)]
    model: String,
    /// Environment variable holding the bearer token.
    #[arg(long, default_value = "METAQA_API_KEY")]
    api_key_env: String,
    /// Generation parameter copied into each request, as KEY=VALUE (VALUE
    /// parsed as JSON when possible). Repeatable.
    #[arg(long = "param", value_parser = commands::parse_param)]
    params: Vec<(String, serde_json::Value)>,
    #[arg(long, default_value_t = 300)]
    timeout_secs: u64,
}

#[derive(Args)]
struct ParaphraseArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    provider: ProviderArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// The five-country, three-indicator, four-year context instead.
    #[arg(long)]
    tiny: bool,
}

#[derive(Args)]
struct LevelArgs {
    /// Comma-separated M49 tiers to draw regions from: global, region,
    /// sub-region, intermediate.
    #[arg(long, value_delimiter = ',', value_parser = commands::parse_level, default_value = "region,sub-region")]
    region_levels: Vec<RegionLevel>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 20)]
    n_per_template: usize,
    /// answerable-full, partial or unanswerable.
    #[arg(long, default_value = "answerable-full")]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated template names (default: all twenty).
    #[arg(long, value_delimiter = ',')]
    templates: Vec<TemplateId>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    levels: LevelArgs,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// Transcript directory. Questions with a completed transcript here are
    /// skipped, so an interrupted run can be resumed. Use one directory per
    /// configuration.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    provider: ProviderArgs,
    /// Examples per tool in the system prompt: 0, 1 or 3.
    #[arg(long, default_value_t = 0)]
    n_shot: usize,
    /// all or data-only.
    #[arg(long, default_value = "all")]
    tools: ToolMode,
    #[arg(long, default_value_t = metaqa_core::harness::DEFAULT_MAX_TURNS)]
    max_turns: usize,
    /// Seed for the few-shot examples.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Episodes run in parallel.
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    #[arg(long, default_value_t = 4)]
    retries: usize,
    #[arg(long, default_value_t = 1000)]
    backoff_ms: u64,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    runs: PathBuf,
    /// Data directory; when given, country answers also match by code.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Score files to combine (e.g. one per configuration).
    #[arg(long, required = true, num_args = 1..)]
    scores: Vec<PathBuf>,
    /// Directory for report.md, the CSV tables and the per-question cards.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// Optional score file for the replayed episodes.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InventoryArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    levels: LevelArgs,
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let default = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default)))
        .with_writer(std::io::stderr)
        .init();
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Paraphrase(a) => commands::paraphrase(a),
        Command::Synth(a) => commands::synth(a),
        Command::Generate(a) => commands::generate(a),
        Command::Run(a) => commands::run(a),
        Command::Score(a) => commands::score(a),
        Command::Report(a) => commands::report(a),
        Command::ReplayOracle(a) => commands::replay_oracle(a),
        Command::Inventory(a) => commands::inventory(a),
    };
    match result {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
