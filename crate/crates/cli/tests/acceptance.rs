//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{metaqa, serve_oracle_chat, serve_world_bank};
use metaqa_core::evaluator::{aggregate, read_scores, score_transcript, ScoreCard};
use metaqa_core::fixtures::{m49_csv, synthetic_context, tiny_context};
use metaqa_core::harness::{
    build_prompt, nshot_examples, run_episode, CallRecord, Message, OracleProvider, ProviderConfig, Role,
    RunConfig, ScriptedProvider, Transcript,
};
use metaqa_core::oracle::{brute_force_answer, execute_plan, plan_for, PlanOutcome};
use metaqa_core::templates::{read_dataset, sample_dataset, GenerationConfig, Mode, QuestionInstance, TemplateId};
use metaqa_core::tools::{
    all_specs, is_utility, schema, ErrorKind, Registry, ToolCall, ToolMode, ToolOutcome, FINAL_ANSWER,
    INDICATOR_CODE,
};
use metaqa_core::value::approx_eq;
use metaqa_core::wb_data::{DataContext, RegionLevel};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::{json, Value};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

/// Runs the binary and fails with its stderr if it exits non-zero.
fn cli(dir: &Path, args: &[&str]) -> Result<String, String> {
    let out = metaqa(dir, args);
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    if out.status.success() {
        Ok(stdout)
    } else {
        Err(format!("`metaqa {}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim()))
    }
}

fn tempdir() -> Result<tempfile::TempDir, String> {
    tempfile::tempdir().map_err(|e| e.to_string())
}

fn oracle_replay() -> Check {
    let start = Instant::now();
    let tmp = tempdir()?;
    let d = tmp.path();
    cli(d, &["synth", "--out", "data", "--seed", "1"])?;
    cli(d, &["generate", "--data", "data", "--n-per-template", "20", "--mode", "answerable-full", "--out", "ds.jsonl"])?;
    cli(d, &["replay-oracle", "--data", "data", "--dataset", "ds.jsonl", "--out", "scores.jsonl"])?;
    let cards = read_scores(&d.join("scores.jsonl")).map_err(|e| e.to_string())?;
    let report = aggregate(&cards).map_err(|e| e.to_string())?;
    let [row] = report.rows.as_slice() else {
        return Err(format!("expected one configuration, got {}", report.rows.len()));
    };
    ensure(row.n == 400, || format!("n = {}", row.n))?;
    ensure(
        (row.accuracy, row.precision_mean, row.recall_mean, row.err_rate) == (1.0, 1.0, 1.0, 0.0),
        || format!("{row:?}"),
    )?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(120), || format!("took {took:?}"))?;
    Ok(format!("400 instances, acc/P/R = 1, err 0, {took:.1?}"))
}

fn brute_force_equivalence() -> Check {
    let ctx = tiny_context();
    let mut config = GenerationConfig::new(2, Mode::AnswerableFull, 4);
    config.region_levels = RegionLevel::ALL.to_vec();
    let (qs, _) = sample_dataset(&ctx, &config);
    let covered: HashSet<_> = qs.iter().map(|q| q.template).collect();
    ensure(covered.len() == TemplateId::ALL.len(), || format!("only {} templates instantiated", covered.len()))?;
    for q in &qs {
        let out = execute_plan(&plan_for(q.template), &q.slots, &ctx).map_err(|e| format!("{}: {e}", q.question_id))?;
        let PlanOutcome::Answered { answer, .. } = out else {
            return Err(format!("{}: {out:?}", q.question_id));
        };
        let brute = brute_force_answer(q.template, &q.slots, &ctx)?;
        let same = match (&answer, &brute) {
            (Value::Number(a), Value::Number(b)) => approx_eq(a.as_f64().unwrap(), b.as_f64().unwrap(), 1e-9),
            _ => answer == brute,
        };
        ensure(same, || format!("{}: plan {answer} vs direct {brute}", q.question_id))?;
    }
    Ok(format!("{} instances over all 20 templates", qs.len()))
}

struct Replays {
    ctx: DataContext,
    questions: Vec<QuestionInstance>,
    transcripts: Vec<Transcript>,
}

impl Replays {
    fn new() -> Self {
        let ctx = synthetic_context(5);
        let (questions, _) = sample_dataset(&ctx, &GenerationConfig::new(3, Mode::AnswerableFull, 9));
        let provider = OracleProvider::from_instances(&questions);
        let config = RunConfig::new(ProviderConfig::new("http://oracle", "oracle"));
        let transcripts = questions.iter().map(|q| run_episode(q, &config, &ctx, &provider)).collect();
        Self { ctx, questions, transcripts }
    }

    fn score(&self, i: usize, calls: Vec<CallRecord>) -> ScoreCard {
        let mut t = self.transcripts[i].clone();
        t.predicted_calls = calls;
        score_transcript(&t, &self.questions[i], Some(&self.ctx))
    }

    fn perfect(&self, i: usize) -> ScoreCard {
        self.score(i, self.transcripts[i].predicted_calls.clone())
    }

    /// Replayed calls without the closing final_answer.
    fn actions(&self, i: usize) -> Vec<CallRecord> {
        let calls = &self.transcripts[i].predicted_calls;
        calls[..calls.len() - 1].to_vec()
    }
}

fn metric_perturbations() -> Check {
    let r = Replays::new();
    let n = r.questions.len();
    for i in 0..n {
        let c = r.perfect(i);
        ensure(c.correct && c.precision == 1.0 && c.recall == 1.0, || format!("imperfect replay {c:?}"))?;
    }
    runner(100)
        .run(&(0..n), |i| {
            let calls = r.actions(i).into_iter().flat_map(|c| [c.clone(), c]).collect();
            let card = r.score(i, calls);
            prop_assert_eq!((card.precision, card.recall), (0.5, 1.0));
            Ok(())
        })
        .map_err(|e| format!("duplicates: {e}"))?;

    runner(100)
        .run(&(0..n, 0u32..1000), |(i, tag)| {
            let mut calls = r.actions(i);
            let k = calls.len();
            calls.push(CallRecord {
                call: ToolCall::new("x", "count", json!({"values": [format!("unrelated {tag}")]})),
                outcome: ToolOutcome::Ok(json!(1)),
            });
            let card = r.score(i, calls);
            prop_assert_eq!((card.precision, card.recall), (k as f64 / (k + 1) as f64, 1.0));
            Ok(())
        })
        .map_err(|e| format!("irrelevant call: {e}"))?;

    runner(100)
        .run(&(0..n), |i| {
            let calls = r.transcripts[i]
                .predicted_calls
                .iter()
                .cloned()
                .map(|mut c| {
                    if c.call.name == "greater_than" {
                        let (a, b) = (c.call.args["value_a"].clone(), c.call.args["value_b"].clone());
                        c.call.name = "less_than".into();
                        c.call.args = json!({"value_a": b, "value_b": a});
                    }
                    c
                })
                .collect();
            prop_assert_eq!(r.score(i, calls), r.perfect(i));
            Ok(())
        })
        .map_err(|e| format!("flipped comparisons: {e}"))?;

    let think_at = (0..n, prop::collection::vec(any::<prop::sample::Index>(), 1..5));
    runner(100)
        .run(&think_at, |(i, at)| {
            let mut calls = r.transcripts[i].predicted_calls.clone();
            for (k, p) in at.iter().enumerate() {
                let think = CallRecord {
                    call: ToolCall::new(format!("t{k}"), "think", json!({"thought": "checking"})),
                    outcome: ToolOutcome::Ok(json!("ok")),
                };
                calls.insert(p.index(calls.len() + 1), think);
            }
            prop_assert_eq!(r.score(i, calls), r.perfect(i));
            Ok(())
        })
        .map_err(|e| format!("think calls: {e}"))?;

    Ok(format!("4 properties x 100 cases over {n} replays"))
}

fn tool_laws() -> Check {
    let ctx = tiny_context();
    let registry = Registry::new(ToolMode::All);
    let run = |name: &str, args: Value| registry.execute_named(name, &args, &ctx);
    let num = |name: &str, args: Value| match run(name, args) {
        ToolOutcome::Ok(v) => v.as_f64().unwrap_or(f64::NAN),
        ToolOutcome::Error(_) => f64::NAN,
    };
    let values = || prop::collection::vec((-10_000i32..10_000).prop_map(|x| f64::from(x) / 8.0), 1..8);
    let shuffled = values().prop_flat_map(|xs| (Just(xs.clone()), Just(xs).prop_shuffle()));

    runner(500)
        .run(&shuffled, |(xs, ys)| {
            for tool in ["add", "multiply", "mean"] {
                let (a, b) = (num(tool, json!({"values": xs})), num(tool, json!({"values": ys})));
                prop_assert!(approx_eq(a, b, 1e-12), "{tool}: {a} vs {b}");
            }
            for tool in ["maximum", "minimum", "count"] {
                prop_assert_eq!(num(tool, json!({"values": xs})), num(tool, json!({"values": ys})));
            }
            Ok(())
        })
        .map_err(|e| format!("permutation invariance: {e}"))?;

    runner(500)
        .run(&(-1e6f64..1e6, -1e6f64..1e6), |(a, b)| {
            prop_assert_eq!(
                run("greater_than", json!({"value_a": a, "value_b": b})),
                run("less_than", json!({"value_a": b, "value_b": a}))
            );
            Ok(())
        })
        .map_err(|e| format!("comparison duality: {e}"))?;

    runner(500)
        .run(&(values(), any::<prop::sample::Index>()), |(xs, pick)| {
            let q = xs[pick.index(xs.len())];
            let expected = 1 + xs.iter().filter(|&&x| x > q).count();
            prop_assert_eq!(num("rank", json!({"values": xs, "query_value": q})), expected as f64);
            Ok(())
        })
        .map_err(|e| format!("rank: {e}"))?;

    runner(500)
        .run(&values(), |xs| {
            let ToolOutcome::Ok(Value::Array(sorted)) = run("sort", json!({"values": xs})) else {
                return Err(TestCaseError::fail("sort failed"));
            };
            let sorted: Vec<f64> = sorted.iter().filter_map(Value::as_f64).collect();
            let mut expected = xs.clone();
            expected.sort_by(f64::total_cmp);
            prop_assert_eq!(sorted, expected);
            Ok(())
        })
        .map_err(|e| format!("sort: {e}"))?;

    runner(500)
        .run(&(-1e6f64..1e6), |a| {
            let kind = |o: ToolOutcome| o.error().map(|e| e.kind);
            prop_assert_eq!(kind(run("divide", json!({"value_a": a, "value_b": 0}))), Some(ErrorKind::ArithmeticError));
            for tool in ["add", "multiply", "mean", "maximum", "minimum"] {
                prop_assert_eq!(kind(run(tool, json!({"values": []}))), Some(ErrorKind::ArithmeticError));
            }
            Ok(())
        })
        .map_err(|e| format!("arithmetic errors: {e}"))?;

    let names: Vec<String> = all_specs().iter().map(|s| s.name.to_string()).collect();
    let leaf = prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::from),
        any::<f64>().prop_map(|x| serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)),
        "[a-zA-Z0-9 _]{0,12}".prop_map(Value::from),
    ];
    let json_value = leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(Value::Array),
            prop::collection::btree_map(
                prop_oneof![Just("values".to_string()), Just("value_a".to_string()), "[a-z_]{1,8}"],
                inner,
                0..4
            )
            .prop_map(|m| Value::Object(m.into_iter().collect())),
        ]
    });
    let data_only = Registry::new(ToolMode::DataOnly);
    runner(500)
        .run(&(prop::sample::select(names), json_value, "[a-z_]{0,10}"), |(name, args, junk)| {
            let total = std::panic::catch_unwind(|| {
                for n in [name.as_str(), junk.as_str()] {
                    registry.execute_named(n, &args, &ctx);
                    data_only.execute_named(n, &args, &ctx);
                }
            });
            prop_assert!(total.is_ok(), "{name}({args}) panicked");
            Ok(())
        })
        .map_err(|e| format!("execute is total: {e}"))?;

    Ok("6 laws x 500 cases".into())
}

fn scripted_config(mode: ToolMode, max_turns: usize) -> RunConfig {
    let mut c = RunConfig::new(ProviderConfig::new("http://scripted", "scripted"));
    c.tool_mode = mode;
    c.max_turns = max_turns;
    c.retry = metaqa_core::harness::RetryPolicy::none();
    c
}

fn says(calls: Vec<ToolCall>) -> Message {
    Message::assistant(None, calls)
}

fn mode_gating() -> Check {
    let specs = schema(ToolMode::DataOnly);
    ensure(specs.len() == 9, || format!("data_only has {} tools", specs.len()))?;
    let ctx = tiny_context();
    let (qs, _) = sample_dataset(&ctx, &GenerationConfig::new(1, Mode::AnswerableFull, 1));
    let provider = ScriptedProvider::new([says(vec![
        ToolCall::new("a", "add", json!({"values": [1, 2]})),
        ToolCall::new("b", FINAL_ANSWER, json!({"answer": 3})),
    ])]);
    let t = run_episode(&qs[0], &scripted_config(ToolMode::DataOnly, 5), &ctx, &provider);
    let kind = t.predicted_calls[0].outcome.error().map(|e| e.kind);
    ensure(kind == Some(ErrorKind::UnknownTool), || format!("add gave {:?}", t.predicted_calls[0].outcome))?;
    ensure(t.had_error, || "had_error not set".into())?;
    Ok("9 tools; add -> UnknownTool, had_error".into())
}

/// System and user first; call ids unique; every executed call answered by
/// exactly one tool message that follows the assistant message issuing it.
fn integrity(t: &Transcript) -> Result<(), String> {
    let roles: Vec<Role> = t.messages.iter().take(2).map(|m| m.role).collect();
    ensure(roles == [Role::System, Role::User], || format!("opening roles {roles:?}"))?;
    let mut issued = HashSet::new();
    let mut answered = BTreeMap::<String, usize>::new();
    let mut open = HashSet::new();
    for m in &t.messages {
        match m.role {
            Role::Assistant => {
                open.clear();
                for c in &m.tool_calls {
                    ensure(!c.id.is_empty() && issued.insert(c.id.clone()), || format!("id {:?} reused", c.id))?;
                    open.insert(c.id.clone());
                }
            }
            Role::Tool => {
                let id = m.tool_call_id.clone().unwrap_or_default();
                ensure(open.contains(&id), || format!("tool message {id:?} has no issuing call"))?;
                *answered.entry(id).or_default() += 1;
            }
            _ => {}
        }
    }
    for r in &t.predicted_calls {
        ensure(answered.get(&r.call.id) == Some(&1), || format!("call {} not answered once", r.call.id))?;
    }
    ensure(answered.len() == t.predicted_calls.len(), || "tool messages without a recorded call".into())
}

fn harness_conformance() -> Check {
    let ctx = tiny_context();
    let mut config = GenerationConfig::new(1, Mode::AnswerableFull, 3);
    config.templates = vec![TemplateId::PropertyOfSubject];
    let (qs, _) = sample_dataset(&ctx, &config);
    let q = qs.first().ok_or("no PropertyOfSubject instance")?;
    let gold = q.answer.clone().ok_or("no gold")?;
    let call = |id: &str, i: usize| ToolCall::new(id, q.essential_actions[i].tool.clone(), q.essential_actions[i].args.clone());
    let answer = |id: &str| ToolCall::new(id, FINAL_ANSWER, json!({ "answer": gold }));
    let episode = |provider: ScriptedProvider, turns| {
        let t = run_episode(q, &scripted_config(ToolMode::All, turns), &ctx, &provider);
        let card = score_transcript(&t, q, Some(&ctx));
        (t, card)
    };

    // (a) four tool calls (search, indicator code, country code, value), then the answer
    ensure(q.essential_actions.len() == 4, || format!("{} essential actions", q.essential_actions.len()))?;
    let (t, card) = episode(
        ScriptedProvider::new([
            says(vec![call("a", 0)]),
            says(vec![call("b", 1)]),
            says(vec![call("c", 2), call("d", 3)]),
            says(vec![answer("e")]),
        ]),
        30,
    );
    ensure(t.predicted_calls.len() == 5, || format!("{} calls", t.predicted_calls.len()))?;
    ensure(t.final_answer.as_ref() == Some(&gold) && card.correct && !t.had_error, || format!("happy path {card:?}"))?;
    ensure((card.precision, card.recall) == (1.0, 1.0), || format!("happy path {card:?}"))?;
    integrity(&t).map_err(|e| format!("(a) {e}"))?;

    // (b) guessed indicator name fails, search recovers it
    let (t, card) = episode(
        ScriptedProvider::new([
            says(vec![ToolCall::new("a", INDICATOR_CODE, json!({"indicator_name": "no such indicator"}))]),
            says(vec![call("b", 0)]),
            says(vec![call("c", 1), call("d", 2), call("e", 3)]),
            says(vec![answer("f")]),
        ]),
        30,
    );
    let first = t.predicted_calls[0].outcome.error().map(|e| e.kind);
    ensure(first == Some(ErrorKind::NotFound), || format!("bad name gave {first:?}"))?;
    ensure(t.had_error && card.correct && card.had_error, || format!("recovery {card:?}"))?;
    integrity(&t).map_err(|e| format!("(b) {e}"))?;

    // (c) a model that never calls final_answer
    let (t, card) = episode(
        ScriptedProvider::new((0..10).map(|i| says(vec![call(&format!("x{i}"), 0)]))),
        4,
    );
    ensure(t.turn_count == 4 && t.final_answer.is_none(), || format!("{} turns, {:?}", t.turn_count, t.final_answer))?;
    ensure(card.is_scored() && !card.correct, || format!("never answering {card:?}"))?;
    integrity(&t).map_err(|e| format!("(c) {e}"))?;

    Ok("happy path, search recovery, max_turns stop; ids consistent".into())
}

fn nshot_consistency() -> Check {
    let registry = Registry::new(ToolMode::All);
    let mut shown = 0;
    for ctx in [tiny_context(), synthetic_context(3)] {
        for mode in [ToolMode::All, ToolMode::DataOnly] {
            for (n, seed) in [(1, 7), (3, 8)] {
                let mut config = scripted_config(mode, 1);
                config.n_shot = n;
                config.seed = seed;
                let system = build_prompt(&config, "Q?", &ctx)[0].content.clone().unwrap_or_default();
                let examples = nshot_examples(&schema(mode), n, seed, &ctx);
                for e in &examples {
                    ensure(system.contains(&e.render()), || format!("{} not in prompt", e.render()))?;
                    let again = registry.execute(&e.call, &ctx).render();
                    ensure(again == e.output, || format!("{}: shown {} but got {again}", e.call.name, e.output))?;
                }
                for spec in schema(mode).iter().filter(|s| !is_utility(s.name)) {
                    let k = examples.iter().filter(|e| e.call.name == spec.name).count();
                    ensure(k == n, || format!("{n}-shot {mode}: {} has {k} examples", spec.name))?;
                }
                shown += examples.len();
            }
        }
    }
    Ok(format!("{shown} examples re-executed"))
}

fn dataset_determinism() -> Check {
    let tmp = tempdir()?;
    let d = tmp.path();
    cli(d, &["synth", "--out", "data", "--seed", "3"])?;
    for out in ["a.jsonl", "b.jsonl"] {
        cli(d, &["generate", "--data", "data", "--n-per-template", "5", "--seed", "11", "--out", out])?;
    }
    let read = |p: &str| fs::read(d.join(p)).map_err(|e| e.to_string());
    ensure(read("a.jsonl")? == read("b.jsonl")?, || "generate output differs between runs".into())?;

    let ctx = synthetic_context(6);
    fs::write(d.join("m49.csv"), m49_csv(&ctx)).map_err(|e| e.to_string())?;
    let base = serve_world_bank(ctx);
    let text = cli(d, &["ingest", "--api-base", &base, "--m49", "m49.csv", "--out", "ingested"])?;
    let table = text.lines().skip_while(|l| !l.contains("| Slot type | Values |")).take(7).collect::<Vec<_>>();
    ensure(table.len() == 7, || format!("no inventory in ingest output:\n{text}"))?;
    Ok(format!("identical bytes; inventory {}", table[2..].join(" ").replace("| |", "|")))
}

fn end_to_end() -> Check {
    let start = Instant::now();
    let tmp = tempdir()?;
    let d = tmp.path();
    let ctx = synthetic_context(8);
    fs::write(d.join("m49.csv"), m49_csv(&ctx)).map_err(|e| e.to_string())?;
    let wb = serve_world_bank(ctx);
    cli(d, &["ingest", "--api-base", &wb, "--m49", "m49.csv", "--out", "data"])?;
    cli(d, &["generate", "--data", "data", "--n-per-template", "2", "--seed", "4", "--out", "ds.jsonl"])?;
    let questions = read_dataset(&d.join("ds.jsonl")).map_err(|e| e.to_string())?;
    ensure(questions.len() == 40, || format!("{} questions", questions.len()))?;
    let chat = serve_oracle_chat(&questions);
    cli(d, &["run", "--data", "data", "--dataset", "ds.jsonl", "--out", "runs", "--base-url", &chat.base_url, "--model", "mock"])?;
    cli(d, &["score", "--dataset", "ds.jsonl", "--runs", "runs", "--data", "data", "--out", "scores.jsonl"])?;
    let md = cli(d, &["report", "--scores", "scores.jsonl", "--out", "report"])?;
    ensure(md.contains("| Model | Shots | Tools | n | Err. | Acc. | Precision | Recall |"), || format!("header missing:\n{md}"))?;
    let row = md.lines().find(|l| l.starts_with("| mock |")).ok_or_else(|| format!("no mock row:\n{md}"))?;
    let cells: Vec<&str> = row.split('|').map(str::trim).filter(|c| !c.is_empty()).collect();
    ensure(cells.len() == 8 && cells[3] == "40", || format!("row {row}"))?;
    ensure(cells[6].contains('±') && cells[7].contains('±'), || format!("row {row}"))?;
    let took = start.elapsed();
    ensure(took < Duration::from_secs(300), || format!("took {took:?}"))?;
    Ok(format!("{row} in {took:.1?}"))
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Check); 9] = [
        ("oracle replay", oracle_replay),
        ("brute-force equivalence", brute_force_equivalence),
        ("metric perturbations", metric_perturbations),
        ("tool laws", tool_laws),
        ("mode gating", mode_gating),
        ("harness conformance", harness_conformance),
        ("n-shot self-consistency", nshot_consistency),
        ("dataset determinism", dataset_determinism),
        ("end-to-end dry run", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.into_iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {} {name}: {e}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
