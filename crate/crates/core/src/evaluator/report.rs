//! Aggregates over score cards, and the score/report file formats.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ScoreCard;
use crate::tools::ToolMode;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no scored cards to aggregate")]
    Empty,
    #[error("{path}: {message}")]
    File { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfigKey {
    pub model: String,
    pub n_shot: usize,
    pub tool_mode: ToolMode,
}

impl ConfigKey {
    fn of(c: &ScoreCard) -> Self {
        Self {
            model: c.model.clone(),
            n_shot: c.n_shot,
            tool_mode: c.tool_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRow {
    pub key: ConfigKey,
    /// Scored episodes; provider failures and unscored cards are excluded.
    pub n: usize,
    pub failures: usize,
    pub unscored: usize,
    pub err_rate: f64,
    pub accuracy: f64,
    pub precision_mean: f64,
    pub precision_std: f64,
    pub recall_mean: f64,
    pub recall_std: f64,
}

/// Accuracy conditioned on whether any tool call errored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSplitRow {
    pub key: ConfigKey,
    pub n_error: usize,
    pub acc_error: Option<f64>,
    pub n_clean: usize,
    pub acc_clean: Option<f64>,
}

/// Accuracy with all tools against data retrieval tools only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRow {
    pub model: String,
    pub n_shot: usize,
    pub acc_all: f64,
    pub acc_data_only: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub rows: Vec<ConfigRow>,
    pub error_split: Vec<ErrorSplitRow>,
    pub modes: Vec<ModeRow>,
}

/// Mean and population standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn accuracy(cards: &[&ScoreCard]) -> Option<f64> {
    (!cards.is_empty()).then(|| cards.iter().filter(|c| c.correct).count() as f64 / cards.len() as f64)
}

pub fn aggregate(cards: &[ScoreCard]) -> Result<AggregateReport, ReportError> {
    let mut groups: BTreeMap<ConfigKey, Vec<&ScoreCard>> = BTreeMap::new();
    for c in cards {
        groups.entry(ConfigKey::of(c)).or_default().push(c);
    }
    let mut rows = Vec::new();
    let mut error_split = Vec::new();
    for (key, group) in &groups {
        let scored: Vec<&ScoreCard> = group
            .iter()
            .copied()
            .filter(|c| c.is_scored() && c.failure.is_none())
            .collect();
        if scored.is_empty() {
            continue;
        }
        let precision: Vec<f64> = scored.iter().map(|c| c.precision).collect();
        let recall: Vec<f64> = scored.iter().map(|c| c.recall).collect();
        let (precision_mean, precision_std) = mean_std(&precision);
        let (recall_mean, recall_std) = mean_std(&recall);
        let (with_err, clean): (Vec<&ScoreCard>, Vec<&ScoreCard>) = scored.iter().partition(|c| c.had_error);
        rows.push(ConfigRow {
            key: key.clone(),
            n: scored.len(),
            failures: group.iter().filter(|c| c.is_scored() && c.failure.is_some()).count(),
            unscored: group.iter().filter(|c| !c.is_scored()).count(),
            err_rate: with_err.len() as f64 / scored.len() as f64,
            accuracy: accuracy(&scored).unwrap_or(0.0),
            precision_mean,
            precision_std,
            recall_mean,
            recall_std,
        });
        error_split.push(ErrorSplitRow {
            key: key.clone(),
            n_error: with_err.len(),
            acc_error: accuracy(&with_err),
            n_clean: clean.len(),
            acc_clean: accuracy(&clean),
        });
    }
    if rows.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut modes = Vec::new();
    for all in rows.iter().filter(|r| r.key.tool_mode == ToolMode::All) {
        if let Some(data) = rows.iter().find(|r| {
            r.key.tool_mode == ToolMode::DataOnly && r.key.model == all.key.model && r.key.n_shot == all.key.n_shot
        }) {
            modes.push(ModeRow {
                model: all.key.model.clone(),
                n_shot: all.key.n_shot,
                acc_all: all.accuracy,
                acc_data_only: data.accuracy,
            });
        }
    }
    Ok(AggregateReport {
        rows,
        error_split,
        modes,
    })
}

fn pm(mean: f64, std: f64) -> String {
    format!("{mean:.2}±{std:.2}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

/// Markdown tables: the main results, accuracy split by error presence, and
/// the all-tools against data-only comparison when both were run.
pub fn render_markdown(report: &AggregateReport) -> String {
    let mut s = String::from("## Results\n\n");
    s.push_str("| Model | Shots | Tools | n | Err. | Acc. | Precision | Recall |\n");
    s.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in &report.rows {
        s.push_str(&format!(
            "| {} | {} | {} | {} | {:.2} | {:.2} | {} | {} |\n",
            r.key.model,
            r.key.n_shot,
            r.key.tool_mode,
            r.n,
            r.err_rate,
            r.accuracy,
            pm(r.precision_mean, r.precision_std),
            pm(r.recall_mean, r.recall_std)
        ));
    }
    s.push_str("\n## Accuracy by error presence\n\n");
    s.push_str("| Model | Shots | Tools | n (error) | Acc. (error) | n (no error) | Acc. (no error) |\n");
    s.push_str("|---|---|---|---|---|---|---|\n");
    for r in &report.error_split {
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} |\n",
            r.key.model,
            r.key.n_shot,
            r.key.tool_mode,
            r.n_error,
            opt(r.acc_error),
            r.n_clean,
            opt(r.acc_clean)
        ));
    }
    if !report.modes.is_empty() {
        s.push_str("\n## All tools vs data-only tools\n\n");
        s.push_str("| Model | Shots | Acc. (all) | Acc. (data only) |\n|---|---|---|---|\n");
        for m in &report.modes {
            s.push_str(&format!(
                "| {} | {} | {:.2} | {:.2} |\n",
                m.model, m.n_shot, m.acc_all, m.acc_data_only
            ));
        }
    }
    s
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Delimited versions of the three tables, keyed by a short table name.
pub fn render_csv(report: &AggregateReport) -> Vec<(&'static str, String)> {
    let results = csv_string(
        &[
            "model", "n_shot", "tools", "n", "err", "acc", "precision_mean", "precision_std", "recall_mean",
            "recall_std", "failures", "unscored",
        ],
        report
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.key.model.clone(),
                    r.key.n_shot.to_string(),
                    r.key.tool_mode.to_string(),
                    r.n.to_string(),
                    r.err_rate.to_string(),
                    r.accuracy.to_string(),
                    r.precision_mean.to_string(),
                    r.precision_std.to_string(),
                    r.recall_mean.to_string(),
                    r.recall_std.to_string(),
                    r.failures.to_string(),
                    r.unscored.to_string(),
                ]
            })
            .collect(),
    );
    let split = csv_string(
        &["model", "n_shot", "tools", "n_error", "acc_error", "n_clean", "acc_clean"],
        report
            .error_split
            .iter()
            .map(|r| {
                vec![
                    r.key.model.clone(),
                    r.key.n_shot.to_string(),
                    r.key.tool_mode.to_string(),
                    r.n_error.to_string(),
                    r.acc_error.map(|x| x.to_string()).unwrap_or_default(),
                    r.n_clean.to_string(),
                    r.acc_clean.map(|x| x.to_string()).unwrap_or_default(),
                ]
            })
            .collect(),
    );
    let modes = csv_string(
        &["model", "n_shot", "acc_all", "acc_data_only"],
        report
            .modes
            .iter()
            .map(|m| {
                vec![
                    m.model.clone(),
                    m.n_shot.to_string(),
                    m.acc_all.to_string(),
                    m.acc_data_only.to_string(),
                ]
            })
            .collect(),
    );
    vec![("results", results), ("error_split", split), ("modes", modes)]
}

fn file_err(path: &Path, e: impl ToString) -> ReportError {
    ReportError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// One card per line.
pub fn write_scores(path: &Path, cards: &[ScoreCard]) -> Result<(), ReportError> {
    let mut out = String::new();
    for c in cards {
        out.push_str(&serde_json::to_string(c).expect("score card serialises"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| file_err(path, e))
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreCard>, ReportError> {
    let text = fs::read_to_string(path).map_err(|e| file_err(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| file_err(path, format!("line {}: {e}", i + 1))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn card(id: &str, mode: ToolMode, correct: bool, p: f64, r: f64, had_error: bool) -> ScoreCard {
        ScoreCard {
            question_id: id.into(),
            model: "m".into(),
            n_shot: 0,
            tool_mode: mode,
            correct,
            precision: p,
            recall: r,
            had_error,
            tp: 0,
            fp: 0,
            matched_essential: 0,
            essential_total: 1,
            failure: None,
            error: None,
        }
    }

    #[test]
    fn perfect_cards() {
        let cards: Vec<_> = (0..4).map(|i| card(&i.to_string(), ToolMode::All, true, 1.0, 1.0, false)).collect();
        let rep = aggregate(&cards).unwrap();
        let r = &rep.rows[0];
        assert_eq!((r.n, r.accuracy, r.err_rate), (4, 1.0, 0.0));
        assert_eq!((r.precision_mean, r.precision_std, r.recall_mean, r.recall_std), (1.0, 0.0, 1.0, 0.0));
        assert!(render_markdown(&rep).contains("| m | 0 | all | 4 | 0.00 | 1.00 | 1.00±0.00 | 1.00±0.00 |"));
    }

    #[test]
    fn population_std() {
        let cards = [
            card("a", ToolMode::All, true, 1.0, 1.0, false),
            card("b", ToolMode::All, true, 0.0, 1.0, false),
        ];
        let r = &aggregate(&cards).unwrap().rows[0];
        assert_eq!((r.precision_mean, r.precision_std), (0.5, 0.5));
    }

    #[test]
    fn error_split_and_modes() {
        let cards = [
            card("a", ToolMode::All, true, 1.0, 1.0, true),
            card("b", ToolMode::All, false, 1.0, 1.0, true),
            card("c", ToolMode::All, true, 1.0, 1.0, false),
            card("a", ToolMode::DataOnly, false, 1.0, 1.0, false),
        ];
        let rep = aggregate(&cards).unwrap();
        let s = &rep.error_split[0];
        assert_eq!((s.n_error, s.acc_error, s.acc_clean), (2, Some(0.5), Some(1.0)));
        assert_eq!(rep.rows[0].err_rate, 2.0 / 3.0);
        assert_eq!(rep.modes.len(), 1);
        assert_eq!((rep.modes[0].acc_all, rep.modes[0].acc_data_only), (2.0 / 3.0, 0.0));
        assert_eq!(rep.error_split[1].acc_error, None);
    }

    #[test]
    fn failures_and_unscored_are_excluded() {
        let mut failed = card("f", ToolMode::All, false, 0.0, 0.0, false);
        failed.failure = Some("timeout".into());
        let mut unscored = card("u", ToolMode::All, false, 0.0, 0.0, false);
        unscored.error = Some("no gold".into());
        let cards = [card("a", ToolMode::All, true, 1.0, 1.0, false), failed, unscored];
        let r = &aggregate(&cards).unwrap().rows[0];
        assert_eq!((r.n, r.failures, r.unscored, r.accuracy), (1, 1, 1, 1.0));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(aggregate(&[]), Err(ReportError::Empty)));
    }

    #[test]
    fn csv_has_table_columns_and_scores_round_trip() {
        let cards = [card("a", ToolMode::All, true, 1.0, 0.5, false)];
        let tables = render_csv(&aggregate(&cards).unwrap());
        assert!(tables[0].1.starts_with("model,n_shot,tools,n,err,acc,precision_mean"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        write_scores(&path, &cards).unwrap();
        assert_eq!(read_scores(&path).unwrap(), cards);
    }
}
