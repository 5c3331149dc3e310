//! Scoring transcripts against gold answers and essential actions.
//!
//! Predicted calls are normalised before matching: `think` and
//! `final_answer` calls are dropped, `less_than(a, b)` becomes
//! `greater_than(b, a)`, and repeats of an earlier call (same tool, same
//! arguments up to list order) can never match. Each remaining call then
//! claims the first unmatched essential action it satisfies.

mod answer;
mod report;

pub use answer::{check_answer, ANSWER_ABS_TOL, ANSWER_REL_TOL};
pub use report::{
    aggregate, read_scores, render_csv, render_markdown, write_scores, AggregateReport, ConfigKey, ConfigRow,
    ErrorSplitRow, ModeRow, ReportError,
};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::harness::{CallRecord, Transcript};
use crate::oracle::{EssentialAction, MatchKind};
use crate::templates::QuestionInstance;
use crate::tools::{ToolCall, ToolMode, ToolOutcome, FINAL_ANSWER, SEARCH, THINK};
use crate::value::{fold, semantic_eq};

const LESS_THAN: &str = "less_than";
const GREATER_THAN: &str = "greater_than";

/// A predicted call after normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedCall {
    pub call: ToolCall,
    /// `None` when the call was never executed.
    pub outcome: Option<ToolOutcome>,
    /// Repeats an earlier call, so it can only count against precision.
    pub duplicate: bool,
}

fn flip_comparison(call: &ToolCall) -> ToolCall {
    let mut args = Map::new();
    if let Value::Object(m) = &call.args {
        for (k, v) in m {
            let key = match k.as_str() {
                "value_a" => "value_b",
                "value_b" => "value_a",
                other => other,
            };
            args.insert(key.to_string(), v.clone());
        }
    }
    ToolCall::new(call.id.clone(), GREATER_THAN, Value::Object(args))
}

pub fn normalize_calls(records: &[CallRecord]) -> Vec<NormalizedCall> {
    let mut out: Vec<NormalizedCall> = Vec::new();
    for r in records {
        if r.call.name == THINK || r.call.name == FINAL_ANSWER {
            continue;
        }
        let call = if r.call.name == LESS_THAN {
            flip_comparison(&r.call)
        } else {
            r.call.clone()
        };
        let duplicate = out
            .iter()
            .any(|p| p.call.name == call.name && semantic_eq(&p.call.args, &call.args, true));
        out.push(NormalizedCall {
            call,
            outcome: Some(r.outcome.clone()),
            duplicate,
        });
    }
    out
}

/// Whether a search result lists one of the accepted indicator names.
fn search_found(outcome: Option<&ToolOutcome>, expect: &[String]) -> bool {
    let Some(Value::Array(hits)) = outcome.and_then(ToolOutcome::payload) else {
        return false;
    };
    let wanted: Vec<String> = expect.iter().map(|e| fold(e)).collect();
    hits.iter().any(|h| {
        let name = h.get("name").and_then(Value::as_str).into_iter();
        let alts = h
            .get("alternative_names")
            .and_then(Value::as_array)
            .into_iter()
            .flatten()
            .filter_map(Value::as_str);
        name.chain(alts).any(|n| wanted.contains(&fold(n)))
    })
}

fn satisfies(call: &NormalizedCall, action: &EssentialAction) -> bool {
    if call.call.name != action.tool || call.outcome.as_ref().is_some_and(ToolOutcome::is_error) {
        return false;
    }
    match action.matcher {
        MatchKind::Exact => semantic_eq(&call.call.args, &action.args, false),
        MatchKind::Multiset => semantic_eq(&call.call.args, &action.args, true),
        MatchKind::Predicate => action.tool == SEARCH && search_found(call.outcome.as_ref(), &action.expect),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    pub matched: usize,
}

/// Greedy in-order matching. Failed calls and duplicates are false positives.
pub fn match_actions(normalized: &[NormalizedCall], essential: &[EssentialAction]) -> MatchCounts {
    let mut used = vec![false; essential.len()];
    let mut counts = MatchCounts { tp: 0, fp: 0, matched: 0 };
    for call in normalized {
        let hit = if call.duplicate {
            None
        } else {
            (0..essential.len()).find(|&j| !used[j] && satisfies(call, &essential[j]))
        };
        match hit {
            Some(j) => {
                used[j] = true;
                counts.tp += 1;
                counts.matched += 1;
            }
            None => counts.fp += 1,
        }
    }
    counts
}

/// `(precision, recall)`; precision is 0 when nothing was called.
pub fn precision_recall(tp: usize, fp: usize, matched: usize, total: usize) -> (f64, f64) {
    let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
    let recall = if total > 0 { matched as f64 / total as f64 } else { 0.0 };
    (precision, recall)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub question_id: String,
    pub model: String,
    pub n_shot: usize,
    pub tool_mode: ToolMode,
    pub correct: bool,
    pub precision: f64,
    pub recall: f64,
    pub had_error: bool,
    pub tp: usize,
    pub fp: usize,
    pub matched_essential: usize,
    pub essential_total: usize,
    /// Provider failure that cut the episode short.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// Set when the card could not be scored (no gold record, unscorable
    /// mode). Such cards are left out of every aggregate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ScoreCard {
    /// Placeholder for a transcript that has nothing to be scored against.
    pub fn unscored(t: &Transcript, reason: impl Into<String>) -> Self {
        Self {
            question_id: t.question_id.clone(),
            model: t.config.model.clone(),
            n_shot: t.config.n_shot,
            tool_mode: t.config.tool_mode,
            correct: false,
            precision: 0.0,
            recall: 0.0,
            had_error: t.had_error,
            tp: 0,
            fp: 0,
            matched_essential: 0,
            essential_total: 0,
            failure: t.failure.clone(),
            error: Some(reason.into()),
        }
    }

    pub fn is_scored(&self) -> bool {
        self.error.is_none()
    }
}

/// Scores one episode. Only fully answerable instances carry a gold answer;
/// anything else yields an unscored card.
pub fn score_transcript(
    t: &Transcript,
    gold: &QuestionInstance,
    ctx: Option<&crate::wb_data::DataContext>,
) -> ScoreCard {
    let Some(answer) = gold.answer.as_ref() else {
        return ScoreCard::unscored(t, format!("{} has no gold answer", gold.question_id));
    };
    if gold.essential_actions.is_empty() {
        return ScoreCard::unscored(t, format!("{} has no essential actions", gold.question_id));
    }
    let normalized = normalize_calls(&t.predicted_calls);
    let counts = match_actions(&normalized, &gold.essential_actions);
    let total = gold.essential_actions.len();
    let (precision, recall) = precision_recall(counts.tp, counts.fp, counts.matched, total);
    let correct = t
        .final_answer
        .as_ref()
        .is_some_and(|p| check_answer(p, answer, gold.answer_type, ctx));
    ScoreCard {
        question_id: t.question_id.clone(),
        model: t.config.model.clone(),
        n_shot: t.config.n_shot,
        tool_mode: t.config.tool_mode,
        correct,
        precision,
        recall,
        had_error: t.had_error,
        tp: counts.tp,
        fp: counts.fp,
        matched_essential: counts.matched,
        essential_total: total,
        failure: t.failure.clone(),
        error: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tools::ToolError;
    use serde_json::json;

    fn rec(name: &str, args: Value) -> CallRecord {
        CallRecord {
            call: ToolCall::new("c", name, args),
            outcome: ToolOutcome::Ok(json!(0)),
        }
    }

    fn exact(tool: &str, args: Value) -> EssentialAction {
        EssentialAction {
            tool: tool.into(),
            args,
            matcher: MatchKind::Exact,
            expect: Vec::new(),
        }
    }

    fn multiset(tool: &str, args: Value) -> EssentialAction {
        EssentialAction {
            matcher: MatchKind::Multiset,
            ..exact(tool, args)
        }
    }

    #[test]
    fn less_than_is_rewritten_with_values_reversed() {
        let n = normalize_calls(&[rec("less_than", json!({"value_a": 3, "value_b": 5}))]);
        assert_eq!(n[0].call.name, "greater_than");
        assert_eq!(n[0].call.args, json!({"value_a": 5, "value_b": 3}));
    }

    #[test]
    fn utility_calls_are_dropped() {
        let n = normalize_calls(&[
            rec("think", json!({"thought": "hm"})),
            rec("add", json!({"values": [1, 2]})),
            rec("final_answer", json!({"answer": 3})),
        ]);
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].call.name, "add");
    }

    #[test]
    fn reordered_list_repeats_are_duplicates() {
        let n = normalize_calls(&[
            rec("add", json!({"values": [1, 2]})),
            rec("add", json!({"values": [2, 1]})),
            rec("add", json!({"values": [1, 2]})),
        ]);
        assert_eq!(n.iter().map(|c| c.duplicate).collect::<Vec<_>>(), [false, true, true]);
    }

    #[test]
    fn verbatim_replay_matches_everything() {
        let ess = vec![
            exact("retrieve_value", json!({"country_code": "GHA", "indicator_code": "X", "year": 2005})),
            multiset("mean", json!({"values": [1, 2, 4]})),
        ];
        let calls: Vec<_> = ess.iter().map(|e| rec(&e.tool, e.args.clone())).collect();
        let c = match_actions(&normalize_calls(&calls), &ess);
        assert_eq!(c, MatchCounts { tp: 2, fp: 0, matched: 2 });
        let mut extra = calls.clone();
        extra.push(rec("add", json!({"values": [9]})));
        assert_eq!(match_actions(&normalize_calls(&extra), &ess), MatchCounts { tp: 2, fp: 1, matched: 2 });
    }

    #[test]
    fn add_then_divide_does_not_stand_in_for_mean() {
        let ess = vec![multiset("mean", json!({"values": [2, 4]}))];
        let calls = [
            rec("add", json!({"values": [2, 4]})),
            rec("divide", json!({"value_a": 6, "value_b": 2})),
        ];
        assert_eq!(match_actions(&normalize_calls(&calls), &ess), MatchCounts { tp: 0, fp: 2, matched: 0 });
    }

    #[test]
    fn failed_calls_never_match() {
        let ess = vec![multiset("add", json!({"values": [1, 2]}))];
        let failed = CallRecord {
            call: ToolCall::new("c", "add", json!({"values": [1, 2]})),
            outcome: ToolOutcome::Error(ToolError::new(crate::tools::ErrorKind::UnknownTool, "no")),
        };
        assert_eq!(match_actions(&normalize_calls(&[failed]), &ess).tp, 0);
    }

    #[test]
    fn search_matches_on_returned_names() {
        let ess = vec![EssentialAction {
            tool: SEARCH.into(),
            args: json!({"keywords": ["cropland"]}),
            matcher: MatchKind::Predicate,
            expect: vec!["Cropland area".into(), "farmed land".into()],
        }];
        let hit = |names: Value| CallRecord {
            call: ToolCall::new("c", SEARCH, json!({"keywords": ["anything"]})),
            outcome: ToolOutcome::Ok(names),
        };
        let by_alt = hit(json!([{"name": "Other", "description": "", "alternative_names": ["Farmed Land"]}]));
        assert_eq!(match_actions(&normalize_calls(&[by_alt]), &ess).tp, 1);
        let miss = hit(json!([{"name": "Forest area", "description": ""}]));
        assert_eq!(match_actions(&normalize_calls(&[miss]), &ess).tp, 0);
    }

    #[test]
    fn precision_recall_arithmetic() {
        assert_eq!(precision_recall(3, 1, 3, 4), (0.75, 0.75));
        assert_eq!(precision_recall(0, 0, 0, 4), (0.0, 0.0));
        assert_eq!(precision_recall(4, 4, 4, 4), (0.5, 1.0));
    }
}
