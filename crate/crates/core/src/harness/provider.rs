//! Chat-completion clients: an HTTP client for OpenAI-compatible endpoints
//! and a scripted in-process provider for tests.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use super::Message;
use crate::tools::ToolSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProviderError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
}

impl ProviderError {
    /// Transport failures, rate limits and server errors are worth retrying.
    pub fn is_retriable(&self) -> bool {
        match self {
            ProviderError::Transport(_) => true,
            ProviderError::Http { status, .. } => *status == 429 || *status >= 500,
            ProviderError::Malformed(_) => false,
        }
    }
}

pub trait ChatProvider: Send + Sync {
    fn chat(&self, messages: &[Message], tools: &[ToolSpec]) -> Result<Message, ProviderError>;
}

/// Endpoint settings. Generation parameters are copied into the request body
/// unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub base_url: String,
    pub model: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    /// Name of the environment variable holding the bearer token.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_timeout() -> u64 {
    300
}

impl ProviderConfig {
    pub fn new(base_url: &str, model: &str) -> Self {
        Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            params: Map::new(),
            api_key_env: None,
            timeout_secs: default_timeout(),
        }
    }
}

/// The request body sent to `{base}/chat/completions`.
pub fn request_body(config: &ProviderConfig, messages: &[Message], tools: &[ToolSpec]) -> Value {
    let mut body = Map::new();
    body.insert("model".into(), Value::from(config.model.as_str()));
    body.insert(
        "messages".into(),
        messages.iter().map(Message::to_wire).collect(),
    );
    if !tools.is_empty() {
        body.insert(
            "tools".into(),
            tools.iter().map(ToolSpec::to_function_declaration).collect(),
        );
    }
    for (k, v) in &config.params {
        body.insert(k.clone(), v.clone());
    }
    Value::Object(body)
}

/// Extracts `choices[0].message` from a chat-completion response.
pub fn parse_response(body: &Value) -> Result<Message, ProviderError> {
    let msg = body
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .ok_or_else(|| ProviderError::Malformed("response has no choices[0].message".into()))?;
    Message::from_wire(msg).map_err(ProviderError::Malformed)
}

pub struct HttpChatProvider {
    config: ProviderConfig,
    agent: ureq::Agent,
    token: Option<String>,
}

impl HttpChatProvider {
    pub fn new(config: ProviderConfig) -> Self {
        let agent = ureq::Agent::new_with_config(
            ureq::Agent::config_builder()
                .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
                .http_status_as_error(false)
                .build(),
        );
        let token = config
            .api_key_env
            .as_deref()
            .and_then(|var| std::env::var(var).ok())
            .filter(|t| !t.is_empty());
        Self {
            config,
            agent,
            token,
        }
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }
}

impl ChatProvider for HttpChatProvider {
    fn chat(&self, messages: &[Message], tools: &[ToolSpec]) -> Result<Message, ProviderError> {
        let url = format!("{}/chat/completions", self.config.base_url);
        let body = request_body(&self.config, messages, tools);
        let mut req = self.agent.post(&url).header("Content-Type", "application/json");
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        let mut resp = req
            .send(body.to_string())
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .with_config()
            .limit(64 * 1024 * 1024)
            .read_to_string()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        if status >= 400 {
            return Err(ProviderError::Http {
                status,
                body: crate::value::truncate_chars(&text, 500),
            });
        }
        let json: Value = serde_json::from_str(&text)
            .map_err(|e| ProviderError::Malformed(format!("invalid JSON body: {e}")))?;
        parse_response(&json)
    }
}

/// Replays queued replies in order and records every request. Once the
/// queue is empty it answers with a plain "no more replies" message.
#[derive(Default)]
pub struct ScriptedProvider {
    replies: Mutex<VecDeque<Result<Message, ProviderError>>>,
    requests: Mutex<Vec<RecordedRequest>>,
}

#[derive(Debug, Clone)]
pub struct RecordedRequest {
    pub messages: Vec<Message>,
    pub tool_names: Vec<String>,
}

impl ScriptedProvider {
    pub fn new(replies: impl IntoIterator<Item = Message>) -> Self {
        Self {
            replies: Mutex::new(replies.into_iter().map(Ok).collect()),
            requests: Mutex::new(Vec::new()),
        }
    }

    pub fn push(&self, reply: Result<Message, ProviderError>) {
        self.replies.lock().unwrap().push_back(reply);
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.requests.lock().unwrap().clone()
    }
}

impl ChatProvider for ScriptedProvider {
    fn chat(&self, messages: &[Message], tools: &[ToolSpec]) -> Result<Message, ProviderError> {
        self.requests.lock().unwrap().push(RecordedRequest {
            messages: messages.to_vec(),
            tool_names: tools.iter().map(|t| t.name.to_string()).collect(),
        });
        self.replies
            .lock()
            .unwrap()
            .pop_front()
            .unwrap_or_else(|| Ok(Message::assistant(Some("no more replies".into()), Vec::new())))
    }
}

/// A canned successful chat-completion response body, for mock servers.
pub fn response_body(message: &Message) -> Value {
    json!({
        "id": "chatcmpl-mock",
        "object": "chat.completion",
        "choices": [{"index": 0, "message": message.to_wire(), "finish_reason": "stop"}]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tools::{schema, ToolCall, ToolMode};
    use std::thread;

    fn serve_once(status: u16, body: String) -> (String, thread::JoinHandle<Value>) {
        let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
        let addr = format!("http://{}", server.server_addr().to_ip().unwrap());
        let handle = thread::spawn(move || {
            let mut req = server.recv().unwrap();
            let mut text = String::new();
            req.as_reader().read_to_string(&mut text).unwrap();
            let auth = req
                .headers()
                .iter()
                .find(|h| h.field.equiv("Authorization"))
                .map(|h| h.value.to_string());
            req.respond(tiny_http::Response::from_string(body).with_status_code(status))
                .unwrap();
            let mut seen: Value = serde_json::from_str(&text).unwrap();
            seen["_auth"] = json!(auth);
            seen
        });
        (addr, handle)
    }

    #[test]
    fn http_round_trip_parses_tool_call() {
        let reply = Message::assistant(
            None,
            vec![ToolCall::new("call_7", "retrieve_value", json!({"country_code": "GHA"}))],
        );
        let (addr, handle) = serve_once(200, response_body(&reply).to_string());
        std::env::set_var("METAQA_TEST_KEY_RT", "sekret");
        let mut config = ProviderConfig::new(&addr, "m");
        config.params.insert("temperature".into(), json!(0.6));
        config.api_key_env = Some("METAQA_TEST_KEY_RT".into());
        let provider = HttpChatProvider::new(config);
        let got = provider
            .chat(&[Message::user("q")], &schema(ToolMode::DataOnly))
            .unwrap();
        assert_eq!(got.tool_calls[0].id, "call_7");
        assert_eq!(got.tool_calls[0].args, json!({"country_code": "GHA"}));
        let seen = handle.join().unwrap();
        assert_eq!(seen["temperature"], 0.6);
        assert_eq!(seen["tools"].as_array().unwrap().len(), 9);
        assert_eq!(seen["_auth"], "Bearer sekret");
    }

    #[test]
    fn server_errors_are_retriable() {
        let (addr, handle) = serve_once(503, "busy".into());
        let provider = HttpChatProvider::new(ProviderConfig::new(&addr, "m"));
        let err = provider.chat(&[Message::user("q")], &[]).unwrap_err();
        assert!(err.is_retriable(), "{err}");
        handle.join().unwrap();
        assert!(!ProviderError::Http { status: 400, body: String::new() }.is_retriable());
    }

    #[test]
    fn malformed_body_is_not_retriable() {
        let (addr, handle) = serve_once(200, "{\"choices\": []}".into());
        let provider = HttpChatProvider::new(ProviderConfig::new(&addr, "m"));
        let err = provider.chat(&[Message::user("q")], &[]).unwrap_err();
        assert!(matches!(err, ProviderError::Malformed(_)));
        handle.join().unwrap();
    }

    #[test]
    fn unreachable_host_is_transport_error() {
        let provider = HttpChatProvider::new(ProviderConfig::new("http://127.0.0.1:9", "m"));
        let err = provider.chat(&[Message::user("q")], &[]).unwrap_err();
        assert!(matches!(err, ProviderError::Transport(_)), "{err}");
    }
}
