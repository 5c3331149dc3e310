//! Dataset records and their JSONL files.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{AnswerType, Mode, Slots, TemplateId};
use crate::oracle::EssentialAction;

/// One generated question. Field order is the on-disk order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionInstance {
    pub question_id: String,
    pub template: TemplateId,
    pub slots: Slots,
    pub text: String,
    pub mode: Mode,
    pub answer_type: AnswerType,
    /// Present only for `answerable_full`.
    pub answer: Option<Value>,
    /// Empty unless `answerable_full`.
    #[serde(default)]
    pub essential_actions: Vec<EssentialAction>,
}

impl QuestionInstance {
    /// Record-level invariants.
    pub fn check(&self) -> Result<(), String> {
        if self.text.contains('<') {
            return Err(format!("{}: text has an unfilled marker", self.question_id));
        }
        let full = self.mode == Mode::AnswerableFull;
        if full != self.answer.is_some() {
            return Err(format!(
                "{}: answer must be present iff mode is answerable_full",
                self.question_id
            ));
        }
        if full && self.essential_actions.is_empty() {
            return Err(format!("{}: no essential actions", self.question_id));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Record {
        path: String,
        line: usize,
        message: String,
    },
}

pub fn write_dataset(path: &Path, instances: &[QuestionInstance]) -> Result<(), DatasetError> {
    let io = |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut out = Vec::new();
    for q in instances {
        serde_json::to_writer(&mut out, q).expect("instance serialises");
        out.push(b'\n');
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&out))
        .map_err(io)
}

/// Reads a dataset, checking each record and the uniqueness of ids.
pub fn read_dataset(path: &Path) -> Result<Vec<QuestionInstance>, DatasetError> {
    let p = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: p.clone(),
        source,
    })?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| DatasetError::Record {
            path: p.clone(),
            line: i + 1,
            message,
        };
        let q: QuestionInstance = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        q.check().map_err(err)?;
        if !seen.insert(q.question_id.clone()) {
            return Err(err(format!("duplicate question_id {}", q.question_id)));
        }
        out.push(q);
    }
    Ok(out)
}
