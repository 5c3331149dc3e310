use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::tools::ToolCall;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

/// One dialogue turn. `tool_calls` is only set on assistant messages and
/// `tool_call_id` only on tool messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tool_calls: Vec<ToolCall>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_call_id: Option<String>,
}

impl Message {
    fn plain(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: Some(content.into()),
            tool_calls: Vec::new(),
            tool_call_id: None,
        }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self::plain(Role::System, content)
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self::plain(Role::User, content)
    }

    pub fn assistant(content: Option<String>, tool_calls: Vec<ToolCall>) -> Self {
        Self {
            role: Role::Assistant,
            content,
            tool_calls,
            tool_call_id: None,
        }
    }

    pub fn tool(call_id: impl Into<String>, content: impl Into<String>) -> Self {
        Self {
            role: Role::Tool,
            content: Some(content.into()),
            tool_calls: Vec::new(),
            tool_call_id: Some(call_id.into()),
        }
    }

    /// The message in the chat-completion request schema. Tool arguments are
    /// sent as a JSON-encoded string.
    pub fn to_wire(&self) -> Value {
        let mut m = json!({ "role": self.role, "content": self.content });
        if !self.tool_calls.is_empty() {
            m["tool_calls"] = self
                .tool_calls
                .iter()
                .map(|c| {
                    let arguments = match &c.args {
                        // unparsable arguments are kept as the raw text
                        Value::String(raw) => raw.clone(),
                        other => other.to_string(),
                    };
                    json!({
                        "id": c.id,
                        "type": "function",
                        "function": { "name": c.name, "arguments": arguments }
                    })
                })
                .collect();
        }
        if let Some(id) = &self.tool_call_id {
            m["tool_call_id"] = Value::from(id.as_str());
        }
        m
    }

    /// Parses a message in the wire schema; without a `role` it is taken to be
    /// an assistant reply. Argument strings that are not a JSON object are
    /// kept verbatim as a string value, which the registry rejects with
    /// `BadArguments`.
    pub fn from_wire(v: &Value) -> Result<Self, String> {
        let obj = v.as_object().ok_or("message is not an object")?;
        let content = match obj.get("content") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            // some servers return content parts
            Some(Value::Array(parts)) => Some(
                parts
                    .iter()
                    .filter_map(|p| p.get("text").and_then(Value::as_str))
                    .collect::<Vec<_>>()
                    .join(""),
            ),
            Some(other) => return Err(format!("unexpected content {other}")),
        };
        let mut tool_calls = Vec::new();
        if let Some(calls) = obj.get("tool_calls").filter(|c| !c.is_null()) {
            let calls = calls.as_array().ok_or("tool_calls is not an array")?;
            for (i, c) in calls.iter().enumerate() {
                let f = c
                    .get("function")
                    .ok_or_else(|| format!("tool_calls[{i}] lacks a function"))?;
                let name = f
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or_else(|| format!("tool_calls[{i}] lacks a function name"))?;
                let args = match f.get("arguments") {
                    None | Some(Value::Null) => json!({}),
                    Some(Value::String(raw)) if raw.trim().is_empty() => json!({}),
                    Some(Value::String(raw)) => match serde_json::from_str::<Value>(raw) {
                        Ok(parsed @ Value::Object(_)) => parsed,
                        _ => Value::String(raw.clone()),
                    },
                    Some(other) => other.clone(),
                };
                let id = c.get("id").and_then(Value::as_str).unwrap_or("").to_string();
                tool_calls.push(ToolCall::new(id, name, args));
            }
        }
        let role = match obj.get("role") {
            None | Some(Value::Null) => Role::Assistant,
            Some(r) => serde_json::from_value(r.clone()).map_err(|_| format!("unknown role {r}"))?,
        };
        let tool_call_id = obj.get("tool_call_id").and_then(Value::as_str).map(str::to_string);
        Ok(Self {
            role,
            content,
            tool_calls,
            tool_call_id,
        })
    }
}
