//! A provider that knows the answers: it replays each question's essential
//! actions in one turn and then submits the gold answer. Used as a self-test
//! of the whole generate, run, score pipeline.

use std::collections::HashMap;

use serde_json::{json, Value};

use super::{ChatProvider, Message, ProviderError, Role};
use crate::oracle::EssentialAction;
use crate::templates::QuestionInstance;
use crate::tools::{ToolCall, ToolSpec, FINAL_ANSWER};

#[derive(Debug, Clone, Default)]
pub struct OracleProvider {
    by_question: HashMap<String, (Vec<EssentialAction>, Value)>,
}

impl OracleProvider {
    /// Instances without a gold answer are skipped.
    pub fn from_instances<'a>(instances: impl IntoIterator<Item = &'a QuestionInstance>) -> Self {
        let by_question = instances
            .into_iter()
            .filter_map(|q| Some((q.text.clone(), (q.essential_actions.clone(), q.answer.clone()?))))
            .collect();
        Self { by_question }
    }

    pub fn len(&self) -> usize {
        self.by_question.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_question.is_empty()
    }
}

impl ChatProvider for OracleProvider {
    fn chat(&self, messages: &[Message], _tools: &[ToolSpec]) -> Result<Message, ProviderError> {
        let question = messages
            .iter()
            .find(|m| m.role == Role::User)
            .and_then(|m| m.content.as_deref())
            .unwrap_or_default();
        let Some((actions, answer)) = self.by_question.get(question) else {
            return Ok(Message::assistant(Some("I do not know this question.".into()), Vec::new()));
        };
        let turn = messages.iter().filter(|m| m.role == Role::Assistant).count();
        let calls = if turn == 0 {
            actions
                .iter()
                .enumerate()
                .map(|(i, a)| ToolCall::new(format!("oracle_{i}"), a.tool.clone(), a.args.clone()))
                .collect()
        } else {
            vec![ToolCall::new("oracle_answer", FINAL_ANSWER, json!({ "answer": answer }))]
        };
        Ok(Message::assistant(None, calls))
    }
}
