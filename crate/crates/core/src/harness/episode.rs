//! One question, one dialogue: the tool-calling loop.

use std::collections::HashSet;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use tracing::{debug, warn};

use super::prompt::build_prompt;
use super::{ChatProvider, Message, ProviderConfig, ProviderError};
use crate::templates::QuestionInstance;
use crate::tools::{Registry, ToolCall, ToolMode, ToolOutcome, ToolSpec, FINAL_ANSWER};
use crate::wb_data::DataContext;

pub const DEFAULT_MAX_TURNS: usize = 30;
pub const NUDGE: &str = "Please continue using tools or provide a final_answer tool call.";
pub const SHOT_COUNTS: [usize; 3] = [0, 1, 3];

/// Bounded retries with exponential backoff for retriable provider errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_retries: usize,
    pub initial_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 4,
            initial_backoff_ms: 1000,
        }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        Self {
            max_retries: 0,
            initial_backoff_ms: 0,
        }
    }

    pub fn chat(
        &self,
        provider: &dyn ChatProvider,
        messages: &[Message],
        tools: &[ToolSpec],
    ) -> Result<Message, ProviderError> {
        let mut delay = self.initial_backoff_ms;
        let mut attempt = 0;
        loop {
            match provider.chat(messages, tools) {
                Err(e) if e.is_retriable() && attempt < self.max_retries => {
                    attempt += 1;
                    warn!("provider error (retry {attempt}/{}): {e}", self.max_retries);
                    thread::sleep(Duration::from_millis(delay));
                    delay = delay.saturating_mul(2);
                }
                other => return other,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_shot: usize,
    pub tool_mode: ToolMode,
    pub max_turns: usize,
    pub provider: ProviderConfig,
    /// Seed for the few-shot examples.
    pub seed: u64,
    #[serde(default)]
    pub retry: RetryPolicy,
}

impl RunConfig {
    pub fn new(provider: ProviderConfig) -> Self {
        Self {
            n_shot: 0,
            tool_mode: ToolMode::All,
            max_turns: DEFAULT_MAX_TURNS,
            provider,
            seed: 0,
            retry: RetryPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !SHOT_COUNTS.contains(&self.n_shot) {
            return Err(format!("n_shot must be 0, 1 or 3, got {}", self.n_shot));
        }
        if self.max_turns == 0 {
            return Err("max_turns must be at least 1".into());
        }
        Ok(())
    }

    /// The part of the configuration stored with each transcript.
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            model: self.provider.model.clone(),
            n_shot: self.n_shot,
            tool_mode: self.tool_mode,
            max_turns: self.max_turns,
            seed: self.seed,
            params: self.provider.params.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub model: String,
    pub n_shot: usize,
    pub tool_mode: ToolMode,
    pub max_turns: usize,
    pub seed: u64,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub call: ToolCall,
    pub outcome: ToolOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub question_id: String,
    pub config: RunSummary,
    pub messages: Vec<Message>,
    pub predicted_calls: Vec<CallRecord>,
    pub final_answer: Option<Value>,
    pub had_error: bool,
    pub turn_count: usize,
    /// Set when the provider could not be reached; such episodes are
    /// reported apart from wrong answers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl Transcript {
    pub fn answered(&self) -> bool {
        self.final_answer.is_some()
    }
}

/// Gives every call a unique, non-empty id.
fn normalise_ids(calls: &mut [ToolCall], seen: &mut HashSet<String>, turn: usize) {
    for (i, c) in calls.iter_mut().enumerate() {
        if c.id.trim().is_empty() || seen.contains(&c.id) {
            let mut k = 0;
            let mut id = format!("call_{turn}_{i}");
            while seen.contains(&id) {
                k += 1;
                id = format!("call_{turn}_{i}_{k}");
            }
            c.id = id;
        }
        seen.insert(c.id.clone());
    }
}

/// Runs one episode. Never panics on provider or tool failures.
pub fn run_episode(
    question: &QuestionInstance,
    config: &RunConfig,
    ctx: &DataContext,
    provider: &dyn ChatProvider,
) -> Transcript {
    let registry = Registry::new(config.tool_mode);
    let mut messages = build_prompt(config, &question.text, ctx);
    let mut predicted = Vec::new();
    let mut final_answer = None;
    let mut failure = None;
    let mut turns = 0;
    let mut ids = HashSet::new();

    while turns < config.max_turns && final_answer.is_none() {
        let reply = match config.retry.chat(provider, &messages, registry.specs()) {
            Ok(r) => r,
            Err(e) => {
                warn!("{}: episode failed: {e}", question.question_id);
                failure = Some(e.to_string());
                break;
            }
        };
        turns += 1;
        let mut calls = reply.tool_calls;
        normalise_ids(&mut calls, &mut ids, turns);
        messages.push(Message::assistant(reply.content, calls.clone()));
        if calls.is_empty() {
            messages.push(Message::user(NUDGE));
            continue;
        }
        for call in calls {
            let outcome = registry.execute(&call, ctx);
            debug!("{} turn {turns}: {}({}) -> {}", question.question_id, call.name, call.args, outcome.render());
            messages.push(Message::tool(call.id.clone(), outcome.render()));
            let done = call.name == FINAL_ANSWER && !outcome.is_error();
            if done {
                final_answer = outcome.payload().cloned();
            }
            predicted.push(CallRecord { call, outcome });
            if done {
                // later calls in the same reply are not executed
                break;
            }
        }
    }

    Transcript {
        question_id: question.question_id.clone(),
        config: config.summary(),
        messages,
        had_error: predicted.iter().any(|r: &CallRecord| r.outcome.is_error()),
        predicted_calls: predicted,
        final_answer,
        turn_count: turns,
        failure,
    }
}
