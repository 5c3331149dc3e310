//! The tool registry: seven data-retrieval tools, thirteen arithmetic tools,
//! and the `think` / `final_answer` utilities.
//!
//! [`Registry::execute`] is total: every call maps to a payload or a typed
//! [`ToolError`], whose message is a single line of the form
//! `"<Kind>: <detail>"` and at most [`MAX_ERROR_LEN`] characters.

pub mod arithmetic;
mod args;
pub mod retrieval;
mod specs;

pub use specs::{all_specs, ParamSpec, ParamType, ToolCategory, ToolSpec};

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::value::{number, render_short, truncate_chars};
use crate::wb_data::DataContext;
use args::Args;

pub const MAX_ERROR_LEN: usize = 400;
pub const THINK_ACK: &str = "ok";
pub const DEFAULT_SEARCH_LIMIT: usize = 10;

pub const SEARCH: &str = "search_for_indicator_names";
pub const COUNTRY_CODE: &str = "get_country_code_from_name";
pub const COUNTRY_NAME: &str = "get_country_name_from_code";
pub const INDICATOR_CODE: &str = "get_indicator_code_from_name";
pub const INDICATOR_NAME: &str = "get_indicator_name_from_code";
pub const REGION_CODES: &str = "get_country_codes_in_region";
pub const RETRIEVE: &str = "retrieve_value";
pub const THINK: &str = "think";
pub const FINAL_ANSWER: &str = "final_answer";

/// Which tool schemas are exposed to a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolMode {
    All,
    DataOnly,
}

impl ToolMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ToolMode::All => "all",
            ToolMode::DataOnly => "data_only",
        }
    }
}

impl fmt::Display for ToolMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ToolMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "all" => Ok(ToolMode::All),
            "data_only" | "data" => Ok(ToolMode::DataOnly),
            other => Err(format!("unknown tool mode '{other}' (expected all or data-only)")),
        }
    }
}

/// A named invocation. `args` is normally a JSON object; anything else is
/// rejected at execution time with `BadArguments`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub id: String,
    pub name: String,
    pub args: Value,
}

impl ToolCall {
    pub fn new(id: impl Into<String>, name: impl Into<String>, args: Value) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            args,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorKind {
    UnknownTool,
    BadArguments,
    NotFound,
    NoData,
    ArithmeticError,
    NestedCallRejected,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::UnknownTool => "UnknownTool",
            ErrorKind::BadArguments => "BadArguments",
            ErrorKind::NotFound => "NotFound",
            ErrorKind::NoData => "NoData",
            ErrorKind::ArithmeticError => "ArithmeticError",
            ErrorKind::NestedCallRejected => "NestedCallRejected",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolError {
    pub kind: ErrorKind,
    pub message: String,
}

impl ToolError {
    pub fn new(kind: ErrorKind, detail: impl AsRef<str>) -> Self {
        let line = format!("{kind}: {}", detail.as_ref().replace(['\n', '\r'], " "));
        Self {
            kind,
            message: truncate_chars(&line, MAX_ERROR_LEN),
        }
    }

    pub fn bad_args(detail: impl AsRef<str>) -> Self {
        Self::new(ErrorKind::BadArguments, detail)
    }

    pub fn not_found(detail: impl AsRef<str>) -> Self {
        Self::new(ErrorKind::NotFound, detail)
    }

    pub fn arithmetic(detail: impl AsRef<str>) -> Self {
        Self::new(ErrorKind::ArithmeticError, detail)
    }
}

impl fmt::Display for ToolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for ToolError {}

/// Result of executing a call: a payload or a typed error, never both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolOutcome {
    Ok(Value),
    Error(ToolError),
}

impl ToolOutcome {
    pub fn is_error(&self) -> bool {
        matches!(self, ToolOutcome::Error(_))
    }

    pub fn payload(&self) -> Option<&Value> {
        match self {
            ToolOutcome::Ok(v) => Some(v),
            ToolOutcome::Error(_) => None,
        }
    }

    pub fn error(&self) -> Option<&ToolError> {
        match self {
            ToolOutcome::Ok(_) => None,
            ToolOutcome::Error(e) => Some(e),
        }
    }

    /// Text placed in the tool message returned to the model.
    pub fn render(&self) -> String {
        match self {
            ToolOutcome::Ok(v) => crate::value::render(v),
            ToolOutcome::Error(e) => e.message.clone(),
        }
    }
}

impl From<Result<Value, ToolError>> for ToolOutcome {
    fn from(r: Result<Value, ToolError>) -> Self {
        match r {
            Ok(v) => ToolOutcome::Ok(v),
            Err(e) => ToolOutcome::Error(e),
        }
    }
}

/// Tool set for one [`ToolMode`]. Stateless; safe to share across threads.
#[derive(Debug, Clone)]
pub struct Registry {
    mode: ToolMode,
    specs: Vec<ToolSpec>,
    search_limit: usize,
}

impl Registry {
    pub fn new(mode: ToolMode) -> Self {
        Self {
            mode,
            specs: schema(mode),
            search_limit: DEFAULT_SEARCH_LIMIT,
        }
    }

    pub fn with_search_limit(mut self, limit: usize) -> Self {
        self.search_limit = limit.max(1);
        self
    }

    pub fn mode(&self) -> ToolMode {
        self.mode
    }

    pub fn specs(&self) -> &[ToolSpec] {
        &self.specs
    }

    pub fn spec(&self, name: &str) -> Option<&ToolSpec> {
        self.specs.iter().find(|s| s.name == name)
    }

    pub fn execute(&self, call: &ToolCall, ctx: &DataContext) -> ToolOutcome {
        self.execute_named(&call.name, &call.args, ctx)
    }

    pub fn execute_named(&self, name: &str, args: &Value, ctx: &DataContext) -> ToolOutcome {
        let Some(spec) = self.spec(name) else {
            return ToolOutcome::Error(ToolError::new(
                ErrorKind::UnknownTool,
                format!(
                    "no tool named '{}' is available",
                    truncate_chars(name, 80)
                ),
            ));
        };
        let map = match args {
            Value::Object(m) => m,
            Value::Null if spec.params.is_empty() => &Map::new(),
            other => {
                return ToolOutcome::Error(ToolError::bad_args(format!(
                    "arguments to {name} must be a JSON object, got {}",
                    render_short(other, 120)
                )))
            }
        };
        if let Some((arg, _)) = map.iter().find(|(_, v)| encodes_tool_call(v)) {
            return ToolOutcome::Error(ToolError::new(
                ErrorKind::NestedCallRejected,
                format!(
                    "argument '{arg}' of {name} contains a tool call; execute each tool call separately and pass its result"
                ),
            ));
        }
        let args = match Args::new(spec, map) {
            Ok(a) => a,
            Err(e) => return ToolOutcome::Error(e),
        };
        dispatch(name, &args, ctx, self.search_limit).into()
    }
}

/// Tool specs exposed in `mode`: 22 for `All`, 9 for `DataOnly`.
pub fn schema(mode: ToolMode) -> Vec<ToolSpec> {
    all_specs()
        .into_iter()
        .filter(|s| mode == ToolMode::All || s.category != ToolCategory::Arithmetic)
        .collect()
}

pub fn is_utility(name: &str) -> bool {
    name == THINK || name == FINAL_ANSWER
}

fn dispatch(name: &str, a: &Args, ctx: &DataContext, search_limit: usize) -> Result<Value, ToolError> {
    use arithmetic as ar;
    match name {
        SEARCH => {
            let hits = retrieval::search_for_indicator_names(ctx, &a.keywords("keywords")?, search_limit)?;
            Ok(serde_json::to_value(hits).expect("search hits serialise"))
        }
        COUNTRY_CODE => retrieval::get_country_code_from_name(ctx, &a.string("country_name")?).map(Value::from),
        COUNTRY_NAME => retrieval::get_country_name_from_code(ctx, &a.string("country_code")?).map(Value::from),
        INDICATOR_CODE => {
            retrieval::get_indicator_code_from_name(ctx, &a.string("indicator_name")?).map(Value::from)
        }
        INDICATOR_NAME => {
            retrieval::get_indicator_name_from_code(ctx, &a.string("indicator_code")?).map(Value::from)
        }
        REGION_CODES => retrieval::get_country_codes_in_region(ctx, &a.string("region")?).map(Value::from),
        RETRIEVE => retrieval::retrieve_value(
            ctx,
            &a.string("country_code")?,
            &a.string("indicator_code")?,
            a.year("year")?,
        )
        .map(number),
        "add" => ar::add(&a.numbers("values")?).map(number),
        "subtract" => ar::subtract(a.number("value_a")?, a.number("value_b")?).map(number),
        "greater_than" => Ok(Value::Bool(ar::greater_than(a.number("value_a")?, a.number("value_b")?))),
        "less_than" => Ok(Value::Bool(ar::less_than(a.number("value_a")?, a.number("value_b")?))),
        "multiply" => ar::multiply(&a.numbers("values")?).map(number),
        "divide" => ar::divide(a.number("value_a")?, a.number("value_b")?).map(number),
        "mean" => ar::mean(&a.nullable_numbers("values")?).map(number),
        "maximum" => ar::maximum(&a.numbers("values")?).map(number),
        "minimum" => ar::minimum(&a.numbers("values")?).map(number),
        "count" => Ok(Value::from(ar::count(a.list("values")?))),
        "rank" => ar::rank(&a.numbers("values")?, a.number("query_value")?).map(Value::from),
        "sort" => Ok(Value::Array(ar::sort(&a.numbers("values")?).into_iter().map(number).collect())),
        "index" => ar::index(&a.scalars("values")?, a.scalar("query_value")?).map(Value::from),
        THINK => Ok(Value::from(THINK_ACK)),
        FINAL_ANSWER => Ok(a.any("answer")?.clone()),
        other => Err(ToolError::new(
            ErrorKind::UnknownTool,
            format!("no tool named '{other}' is available"),
        )),
    }
}

/// Whether `v` (at any depth) looks like a serialised tool invocation, e.g.
/// `{"name": "add", "args": {...}}` or `{"function": {"name": ...}}`.
pub fn encodes_tool_call(v: &Value) -> bool {
    const ARG_KEYS: [&str; 4] = ["args", "arguments", "parameters", "input"];
    match v {
        Value::Object(m) => {
            let named_tool = m
                .get("name")
                .and_then(Value::as_str)
                .is_some_and(|n| all_specs().iter().any(|s| s.name == n));
            if named_tool && ARG_KEYS.iter().any(|k| m.contains_key(*k)) {
                return true;
            }
            if m.get("function").is_some_and(|f| f.get("name").is_some()) {
                return true;
            }
            m.values().any(encodes_tool_call)
        }
        Value::Array(items) => items.iter().any(encodes_tool_call),
        Value::String(s) => {
            let t = s.trim();
            t.starts_with('{')
                && serde_json::from_str::<Value>(t).is_ok_and(|inner| {
                    matches!(inner, Value::Object(_)) && encodes_tool_call(&inner)
                })
        }
        _ => false,
    }
}

/// Convenience for tests and plans: `{"values": [..]}` style argument maps.
pub fn args(pairs: &[(&str, Value)]) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert((*k).to_string(), v.clone());
    }
    Value::Object(m)
}
