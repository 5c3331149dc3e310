use serde_json::{Map, Value};

use super::{ToolError, ToolSpec};
use crate::value::render_short;

/// Argument map checked against a [`ToolSpec`]: no unknown names, no missing
/// required names. Typed getters report `BadArguments` naming the argument
/// and the offending value.
pub(super) struct Args<'a> {
    tool: &'static str,
    map: &'a Map<String, Value>,
}

fn show(v: &Value) -> String {
    render_short(v, 120)
}

impl<'a> Args<'a> {
    pub(super) fn new(spec: &ToolSpec, map: &'a Map<String, Value>) -> Result<Self, ToolError> {
        if let Some(k) = map.keys().find(|k| !spec.params.iter().any(|p| p.name == k.as_str())) {
            let expected: Vec<&str> = spec.params.iter().map(|p| p.name).collect();
            return Err(ToolError::bad_args(format!(
                "unexpected argument '{k}' for {} (expected: {})",
                spec.name,
                expected.join(", ")
            )));
        }
        if let Some(p) = spec.params.iter().find(|p| !map.contains_key(p.name)) {
            return Err(ToolError::bad_args(format!(
                "missing required argument '{}' for {}",
                p.name, spec.name
            )));
        }
        Ok(Self {
            tool: spec.name,
            map,
        })
    }

    pub(super) fn any(&self, name: &str) -> Result<&'a Value, ToolError> {
        self.map
            .get(name)
            .ok_or_else(|| ToolError::bad_args(format!("missing required argument '{name}' for {}", self.tool)))
    }

    pub(super) fn string(&self, name: &str) -> Result<String, ToolError> {
        match self.any(name)? {
            Value::String(s) => Ok(s.clone()),
            other => Err(ToolError::bad_args(format!(
                "'{name}' must be a string, got {}",
                show(other)
            ))),
        }
    }

    pub(super) fn number(&self, name: &str) -> Result<f64, ToolError> {
        let v = self.any(name)?;
        v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| {
            ToolError::bad_args(format!("'{name}' must be a number, got {}", show(v)))
        })
    }

    /// Integer year; integral numbers and digit strings are accepted.
    pub(super) fn year(&self, name: &str) -> Result<i32, ToolError> {
        let v = self.any(name)?;
        let parsed = match v {
            Value::Number(n) => n
                .as_i64()
                .or_else(|| n.as_f64().filter(|x| x.fract() == 0.0).map(|x| x as i64)),
            Value::String(s) => s.trim().parse::<i64>().ok(),
            _ => None,
        };
        parsed
            .and_then(|y| i32::try_from(y).ok())
            .ok_or_else(|| ToolError::bad_args(format!("'{name}' must be an integer year, got {}", show(v))))
    }

    pub(super) fn list(&self, name: &str) -> Result<&'a [Value], ToolError> {
        match self.any(name)? {
            Value::Array(items) => Ok(items),
            other => Err(ToolError::bad_args(format!(
                "'{name}' must be a list, got {}",
                show(other)
            ))),
        }
    }

    /// List of finite numbers; nulls are rejected.
    pub(super) fn numbers(&self, name: &str) -> Result<Vec<f64>, ToolError> {
        self.list(name)?
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| {
                    ToolError::bad_args(format!("'{name}[{i}]' must be a number, got {}", show(v)))
                })
            })
            .collect()
    }

    /// List of numbers where nulls are kept as `None`.
    pub(super) fn nullable_numbers(&self, name: &str) -> Result<Vec<Option<f64>>, ToolError> {
        self.list(name)?
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::Null => Ok(None),
                other => other.as_f64().filter(|x| x.is_finite()).map(Some).ok_or_else(|| {
                    ToolError::bad_args(format!("'{name}[{i}]' must be a number or null, got {}", show(other)))
                }),
            })
            .collect()
    }

    /// List of non-null scalars (numbers, strings, booleans).
    pub(super) fn scalars(&self, name: &str) -> Result<Vec<Value>, ToolError> {
        self.list(name)?
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::Number(_) | Value::String(_) | Value::Bool(_) => Ok(v.clone()),
                other => Err(ToolError::bad_args(format!(
                    "'{name}[{i}]' must be a number or string, got {}",
                    show(other)
                ))),
            })
            .collect()
    }

    pub(super) fn scalar(&self, name: &str) -> Result<Value, ToolError> {
        match self.any(name)? {
            v @ (Value::Number(_) | Value::String(_) | Value::Bool(_)) => Ok(v.clone()),
            other => Err(ToolError::bad_args(format!(
                "'{name}' must be a number or string, got {}",
                show(other)
            ))),
        }
    }

    /// Keywords as given: a single string or a list of strings.
    pub(super) fn keywords(&self, name: &str) -> Result<Vec<String>, ToolError> {
        match self.any(name)? {
            Value::String(s) => Ok(vec![s.clone()]),
            Value::Array(items) => items
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.as_str().map(str::to_string).ok_or_else(|| {
                        ToolError::bad_args(format!("'{name}[{i}]' must be a string, got {}", show(v)))
                    })
                })
                .collect(),
            other => Err(ToolError::bad_args(format!(
                "'{name}' must be a string or list of strings, got {}",
                show(other)
            ))),
        }
    }
}
