use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use metaqa_core::evaluator::{
    aggregate, read_scores, render_csv, render_markdown, score_transcript, write_scores, ScoreCard,
};
use metaqa_core::fixtures::{m49_csv, synthetic_context, tiny_context};
use metaqa_core::harness::{
    read_transcripts, run_episode, transcript_path, write_transcript, ChatProvider, HttpChatProvider,
    OracleProvider, ProviderConfig, RetryPolicy, RunConfig, Transcript,
};
use metaqa_core::oracle::{execute_plan, plan_for, PlanOutcome};
use metaqa_core::templates::{
    read_dataset, sample_dataset, slot_inventory, write_dataset, GenerationConfig, Mode, QuestionInstance,
};
use metaqa_core::wb_data::{self, paraphrase_indicators, DataContext, RegionLevel, WorldBankClient};
use rayon::prelude::*;
use serde_json::Value;
use tracing::{info, warn};

use crate::{
    GenerateArgs, IngestArgs, InventoryArgs, ParaphraseArgs, ProviderArgs, ReplayArgs, ReportArgs, RunArgs,
    ScoreArgs, SynthArgs,
};

pub fn parse_param(s: &str) -> Result<(String, Value), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got '{s}'"))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::from(v));
    Ok((k.trim().to_string(), value))
}

pub fn parse_level(s: &str) -> Result<RegionLevel, String> {
    RegionLevel::parse(s).ok_or_else(|| format!("unknown region level '{s}'"))
}

fn load_data(dir: &Path) -> Result<DataContext> {
    wb_data::load(dir).with_context(|| format!("loading data from {}", dir.display()))
}

fn provider_config(a: &ProviderArgs) -> ProviderConfig {
    let mut c = ProviderConfig::new(&a.base_url, &a.model);
    c.params = a.params.iter().cloned().collect();
    c.api_key_env = Some(a.api_key_env.clone());
    c.timeout_secs = a.timeout_secs;
    c
}

fn print_inventory(ctx: &DataContext, levels: &[RegionLevel]) {
    let inv = slot_inventory(ctx, levels);
    println!("| Slot type | Values |\n|---|---|");
    for (name, n) in [
        ("Subject", inv.subjects),
        ("Region", inv.regions),
        ("Property", inv.properties),
        ("Year", inv.years),
        ("Operator", inv.operators),
    ] {
        println!("| {name} | {n} |");
    }
}

pub fn ingest(a: IngestArgs) -> Result<()> {
    let aliases: BTreeMap<String, String> = match &a.aliases {
        Some(p) => serde_json::from_str(&fs::read_to_string(p).with_context(|| p.display().to_string())?)
            .with_context(|| format!("{}: expected a JSON object of alias -> name", p.display()))?,
        None => BTreeMap::new(),
    };
    let previous = wb_data::load(&a.out).map(|c| c.catalogue().to_vec()).unwrap_or_default();
    let client = WorldBankClient::new(&a.api_base).with_indicator_query(&a.indicator_query);
    let (ctx, summary) = wb_data::ingest(&client, &a.m49, a.years, aliases, &previous)?;
    wb_data::persist(&ctx, &a.out)?;
    info!("wrote {}", a.out.display());
    println!("{}", serde_json::to_string_pretty(&summary)?);
    print_inventory(&ctx, &a.levels.region_levels);
    Ok(())
}

pub fn paraphrase(a: ParaphraseArgs) -> Result<()> {
    let ctx = load_data(&a.data)?;
    let provider = HttpChatProvider::new(provider_config(&a.provider));
    let mut parts = ctx.to_parts();
    let (catalogue, report) = paraphrase_indicators(parts.catalogue, &provider);
    parts.catalogue = catalogue;
    let ctx = DataContext::from_parts(parts)?;
    wb_data::persist(&ctx, &a.data)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let ctx = if a.tiny { tiny_context() } else { synthetic_context(a.seed) };
    wb_data::persist(&ctx, &a.out)?;
    let m49 = a.out.join("m49.csv");
    fs::write(&m49, m49_csv(&ctx)).with_context(|| m49.display().to_string())?;
    info!("wrote {} and {}", a.out.display(), m49.display());
    Ok(())
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    ensure!(a.n_per_template > 0, "--n-per-template must be at least 1");
    let ctx = load_data(&a.data)?;
    let mut config = GenerationConfig::new(a.n_per_template, a.mode, a.seed);
    config.region_levels = a.levels.region_levels.clone();
    if !a.templates.is_empty() {
        config.templates = a.templates.clone();
    }
    let (questions, report) = sample_dataset(&ctx, &config);
    for (t, r) in &report.templates {
        if let Some(e) = &r.error {
            warn!("{t}: {e}");
        }
    }
    let short = report.shortfall();
    if !short.is_empty() {
        warn!("templates short of their quota: {short:?}");
    }
    write_dataset(&a.out, &questions)?;
    info!("wrote {} questions to {}", questions.len(), a.out.display());
    Ok(())
}

/// Transcripts that finished (with or without an answer). Episodes cut
/// short by a provider failure are run again.
fn completed(dir: &Path, question_id: &str) -> bool {
    let path = transcript_path(dir, question_id);
    let Ok(text) = fs::read_to_string(&path) else {
        return false;
    };
    serde_json::from_str::<Transcript>(text.trim()).is_ok_and(|t| t.failure.is_none())
}

fn run_all(
    questions: &[QuestionInstance],
    config: &RunConfig,
    ctx: &DataContext,
    provider: &dyn ChatProvider,
    out: &Path,
    concurrency: usize,
) -> Result<usize> {
    fs::create_dir_all(out).with_context(|| out.display().to_string())?;
    let pending: Vec<&QuestionInstance> = questions.iter().filter(|q| !completed(out, &q.question_id)).collect();
    let skipped = questions.len() - pending.len();
    if skipped > 0 {
        info!("{skipped} questions already have transcripts; skipping them");
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(concurrency.max(1)).build()?;
    let failures: Vec<String> = pool.install(|| {
        pending
            .par_iter()
            .filter_map(|q| {
                let t = run_episode(q, config, ctx, provider);
                let failed = t.failure.is_some();
                match write_transcript(out, &t) {
                    Err(e) => Some(format!("{}: {e}", q.question_id)),
                    Ok(_) if failed => Some(format!("{}: provider failure", q.question_id)),
                    Ok(_) => None,
                }
            })
            .collect()
    });
    for f in &failures {
        warn!("{f}");
    }
    Ok(pending.len() - failures.len())
}

pub fn run(a: RunArgs) -> Result<()> {
    let ctx = load_data(&a.data)?;
    let questions = read_dataset(&a.dataset)?;
    let mut config = RunConfig::new(provider_config(&a.provider));
    config.n_shot = a.n_shot;
    config.tool_mode = a.tools;
    config.max_turns = a.max_turns;
    config.seed = a.seed;
    config.retry = RetryPolicy {
        max_retries: a.retries,
        initial_backoff_ms: a.backoff_ms,
    };
    config.validate().map_err(anyhow::Error::msg)?;
    let provider = HttpChatProvider::new(config.provider.clone());
    let done = run_all(&questions, &config, &ctx, &provider, &a.out, a.concurrency)?;
    info!("{done} episodes written to {}", a.out.display());
    Ok(())
}

fn score_all(
    transcripts: &[Transcript],
    questions: &[QuestionInstance],
    ctx: Option<&DataContext>,
) -> Vec<ScoreCard> {
    let gold: HashMap<&str, &QuestionInstance> = questions.iter().map(|q| (q.question_id.as_str(), q)).collect();
    transcripts
        .iter()
        .map(|t| match gold.get(t.question_id.as_str()) {
            Some(q) => score_transcript(t, q, ctx),
            None => ScoreCard::unscored(t, "no gold record for this question"),
        })
        .collect()
}

fn print_summary(cards: &[ScoreCard]) -> Result<()> {
    match aggregate(cards) {
        Ok(report) => print!("{}", render_markdown(&report)),
        Err(e) => warn!("{e}"),
    }
    Ok(())
}

pub fn score(a: ScoreArgs) -> Result<()> {
    let questions = read_dataset(&a.dataset)?;
    let transcripts = read_transcripts(&a.runs).map_err(anyhow::Error::msg)?;
    ensure!(!transcripts.is_empty(), "no transcripts in {}", a.runs.display());
    let ctx = a.data.as_deref().map(load_data).transpose()?;
    let cards = score_all(&transcripts, &questions, ctx.as_ref());
    for c in cards.iter().filter(|c| !c.is_scored()) {
        warn!("{}: {}", c.question_id, c.error.as_deref().unwrap_or_default());
    }
    write_scores(&a.out, &cards)?;
    info!("wrote {} cards to {}", cards.len(), a.out.display());
    print_summary(&cards)
}

pub fn report(a: ReportArgs) -> Result<()> {
    let mut cards = Vec::new();
    for p in &a.scores {
        cards.extend(read_scores(p)?);
    }
    let report = aggregate(&cards)?;
    fs::create_dir_all(&a.out).with_context(|| a.out.display().to_string())?;
    let md = render_markdown(&report);
    fs::write(a.out.join("report.md"), &md)?;
    for (name, csv) in render_csv(&report) {
        fs::write(a.out.join(format!("{name}.csv")), csv)?;
    }
    fs::write(a.out.join("cards.csv"), cards_csv(&cards)?)?;
    print!("{md}");
    Ok(())
}

/// One row per card, for plotting.
fn cards_csv(cards: &[ScoreCard]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "question_id", "template", "model", "n_shot", "tools", "correct", "precision", "recall", "had_error",
        "tp", "fp", "matched_essential", "essential_total", "failure", "error",
    ])?;
    for c in cards {
        let template = c.question_id.split('_').next().unwrap_or_default();
        w.write_record([
            c.question_id.clone(),
            template.to_string(),
            c.model.clone(),
            c.n_shot.to_string(),
            c.tool_mode.to_string(),
            c.correct.to_string(),
            c.precision.to_string(),
            c.recall.to_string(),
            c.had_error.to_string(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.matched_essential.to_string(),
            c.essential_total.to_string(),
            c.failure.clone().unwrap_or_default(),
            c.error.clone().unwrap_or_default(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn replay_oracle(a: ReplayArgs) -> Result<()> {
    let ctx = load_data(&a.data)?;
    let questions = read_dataset(&a.dataset)?;
    let (full, other): (Vec<_>, Vec<_>) = questions.into_iter().partition(|q| q.mode == Mode::AnswerableFull);
    if !other.is_empty() {
        println!("skipping {} questions that are not fully answerable", other.len());
    }
    ensure!(!full.is_empty(), "no fully answerable questions in {}", a.dataset.display());

    let mut problems = Vec::new();
    for q in &full {
        match execute_plan(&plan_for(q.template), &q.slots, &ctx) {
            Ok(PlanOutcome::Answered { answer, essential }) => {
                if Some(&answer) != q.answer.as_ref() || essential != q.essential_actions {
                    problems.push(format!("{}: stored gold differs from the plan on this data", q.question_id));
                }
            }
            other => problems.push(format!("{}: plan no longer answers: {other:?}", q.question_id)),
        }
    }

    let provider = OracleProvider::from_instances(&full);
    let config = RunConfig::new(ProviderConfig::new("oracle://", "oracle"));
    let cards: Vec<ScoreCard> = full
        .par_iter()
        .map(|q| score_transcript(&run_episode(q, &config, &ctx, &provider), q, Some(&ctx)))
        .collect();
    for c in &cards {
        if !(c.correct && c.precision == 1.0 && c.recall == 1.0 && !c.had_error) {
            problems.push(format!(
                "{}: correct={} precision={} recall={} had_error={}",
                c.question_id, c.correct, c.precision, c.recall, c.had_error
            ));
        }
    }
    if let Some(out) = &a.out {
        write_scores(out, &cards)?;
    }
    print_summary(&cards)?;
    for p in &problems {
        eprintln!("{p}");
    }
    if !problems.is_empty() {
        bail!("{} of {} replayed questions are not perfect", problems.len(), cards.len());
    }
    println!("oracle replay: {} questions, all perfect", cards.len());
    Ok(())
}

pub fn inventory(a: InventoryArgs) -> Result<()> {
    let ctx = load_data(&a.data)?;
    print_inventory(&ctx, &a.levels.region_levels);
    let mut per_level: BTreeMap<RegionLevel, usize> = BTreeMap::new();
    for r in ctx.regions().iter() {
        *per_level.entry(r.level).or_default() += 1;
    }
    for (level, n) in per_level {
        println!("regions at level {}: {n}", level.as_str());
    }
    Ok(())
}
