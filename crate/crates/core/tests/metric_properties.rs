//! Scorecard behaviour under perturbations of a perfect replay.

use std::sync::OnceLock;

use metaqa_core::evaluator::{score_transcript, ScoreCard};
use metaqa_core::fixtures::synthetic_context;
use metaqa_core::harness::{
    run_episode, CallRecord, OracleProvider, ProviderConfig, RunConfig, Transcript,
};
use metaqa_core::templates::{sample_dataset, GenerationConfig, Mode, QuestionInstance};
use metaqa_core::tools::{ToolCall, ToolOutcome};
use metaqa_core::wb_data::DataContext;
use proptest::prelude::*;
use serde_json::{json, Value};

struct Fixture {
    ctx: DataContext,
    questions: Vec<QuestionInstance>,
    replays: Vec<Transcript>,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let ctx = synthetic_context(5);
        let (questions, _) = sample_dataset(&ctx, &GenerationConfig::new(3, Mode::AnswerableFull, 9));
        let provider = OracleProvider::from_instances(&questions);
        let config = RunConfig::new(ProviderConfig::new("http://oracle", "oracle"));
        let replays = questions.iter().map(|q| run_episode(q, &config, &ctx, &provider)).collect();
        Fixture { ctx, questions, replays }
    })
}

fn score(i: usize, calls: Vec<CallRecord>) -> ScoreCard {
    let f = fixture();
    let mut t = f.replays[i].clone();
    t.predicted_calls = calls;
    score_transcript(&t, &f.questions[i], Some(&f.ctx))
}

fn perfect(i: usize) -> ScoreCard {
    score(i, fixture().replays[i].predicted_calls.clone())
}

/// The replayed calls, without the closing final_answer.
fn actions(i: usize) -> Vec<CallRecord> {
    let calls = &fixture().replays[i].predicted_calls;
    calls[..calls.len() - 1].to_vec()
}

fn think(n: usize) -> CallRecord {
    CallRecord {
        call: ToolCall::new(format!("t{n}"), "think", json!({"thought": "checking"})),
        outcome: ToolOutcome::Ok(json!("ok")),
    }
}

fn instance() -> impl Strategy<Value = usize> {
    0..fixture().questions.len()
}

#[test]
fn replay_is_perfect_and_rescoring_is_stable() {
    let f = fixture();
    assert_eq!(f.questions.len(), 60);
    for i in 0..f.questions.len() {
        let card = perfect(i);
        assert!(card.correct, "{}", card.question_id);
        assert_eq!((card.precision, card.recall, card.had_error), (1.0, 1.0, false), "{}", card.question_id);
        assert_eq!(card, perfect(i));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn duplicating_every_action_halves_precision(i in instance()) {
        let calls: Vec<_> = actions(i).into_iter().flat_map(|c| [c.clone(), c]).collect();
        let card = score(i, calls);
        prop_assert_eq!(card.precision, 0.5);
        prop_assert_eq!(card.recall, 1.0);
    }

    #[test]
    fn one_irrelevant_call_costs_one_share(i in instance(), pos in any::<prop::sample::Index>(), tag in 0u32..1000) {
        let mut calls = actions(i);
        let k = calls.len();
        let extra = CallRecord {
            call: ToolCall::new("x", "count", json!({"values": [format!("unrelated {tag}")]})),
            outcome: ToolOutcome::Ok(json!(1)),
        };
        calls.insert(pos.index(k + 1), extra);
        let card = score(i, calls);
        prop_assert_eq!(card.precision, k as f64 / (k + 1) as f64);
        prop_assert_eq!(card.recall, 1.0);
    }

    #[test]
    fn flipped_comparisons_score_identically(i in instance()) {
        let calls = fixture().replays[i]
            .predicted_calls
            .iter()
            .cloned()
            .map(|mut r| {
                if r.call.name == "greater_than" {
                    let a = r.call.args["value_a"].clone();
                    let b = r.call.args["value_b"].clone();
                    r.call.name = "less_than".into();
                    r.call.args = json!({"value_a": b, "value_b": a});
                }
                r
            })
            .collect();
        prop_assert_eq!(score(i, calls), perfect(i));
    }

    #[test]
    fn think_calls_change_nothing(i in instance(), at in prop::collection::vec(any::<prop::sample::Index>(), 1..5)) {
        let mut calls = fixture().replays[i].predicted_calls.clone();
        for (n, p) in at.iter().enumerate() {
            calls.insert(p.index(calls.len() + 1), think(n));
        }
        prop_assert_eq!(score(i, calls), perfect(i));
    }

    #[test]
    fn dropping_an_action_lowers_recall(i in instance(), drop in any::<prop::sample::Index>()) {
        let mut calls = actions(i);
        calls.remove(drop.index(calls.len()));
        let card = score(i, calls);
        prop_assert!(card.recall < 1.0);
        prop_assert_eq!(card.precision, 1.0);
    }

    #[test]
    fn unmatched_calls_never_raise_precision_or_change_recall(i in instance(), junk in prop::collection::vec(0u32..1000, 0..4)) {
        let mut calls = actions(i);
        calls.truncate(calls.len() / 2);
        let before = score(i, calls.clone());
        for j in junk {
            calls.push(CallRecord {
                call: ToolCall::new("j", "add", json!({"values": [1e12 + f64::from(j), 0.5]})),
                outcome: ToolOutcome::Ok(Value::from(1e12 + f64::from(j) + 0.5)),
            });
        }
        let after = score(i, calls);
        prop_assert_eq!(after.recall, before.recall);
        prop_assert!(after.precision <= before.precision);
    }
}
