//! Final-answer comparison. Never panics on malformed predictions.

use serde_json::Value;

use crate::templates::AnswerType;
use crate::value::{approx_eq_abs, coerce_f64, fold, multiset_eq};
use crate::wb_data::{CountryCode, DataContext};

pub const ANSWER_REL_TOL: f64 = 1e-6;
pub const ANSWER_ABS_TOL: f64 = 1e-9;

/// Models often wrap answers in strings; unwrap one level of that.
fn text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn as_bool(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        Value::String(s) => match fold(s).as_str() {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        },
        _ => None,
    }
}

/// Country code for a name, alias or code, when the context knows it.
fn country_key(s: &str, ctx: &DataContext) -> Option<String> {
    if let Some(c) = ctx.country_by_name(s) {
        return Some(c.code.as_str().to_string());
    }
    let code = CountryCode::parse(s.trim()).ok()?;
    ctx.country(&code).map(|c| c.code.as_str().to_string())
}

fn string_eq(p: &Value, g: &Value, ctx: Option<&DataContext>) -> bool {
    let (Some(p), Some(g)) = (text(p), text(g)) else {
        return false;
    };
    if fold(&p) == fold(&g) {
        return true;
    }
    match ctx {
        Some(ctx) => match (country_key(&p, ctx), country_key(&g, ctx)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        },
        None => false,
    }
}

fn number_eq(p: &Value, g: &Value) -> bool {
    match (coerce_f64(p), coerce_f64(g)) {
        (Some(x), Some(y)) => approx_eq_abs(x, y, ANSWER_REL_TOL, ANSWER_ABS_TOL),
        _ => false,
    }
}

/// A predicted list: a JSON array, a string holding one, or a comma-separated
/// string.
fn as_list(v: &Value) -> Option<Vec<Value>> {
    match v {
        Value::Array(xs) => Some(xs.clone()),
        Value::String(s) => {
            if let Ok(Value::Array(xs)) = serde_json::from_str::<Value>(s) {
                return Some(xs);
            }
            Some(
                s.split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(Value::from)
                    .collect(),
            )
        }
        _ => None,
    }
}

/// True when `predicted` answers `gold`. `ctx` enables matching country
/// answers by code.
pub fn check_answer(predicted: &Value, gold: &Value, answer_type: AnswerType, ctx: Option<&DataContext>) -> bool {
    match answer_type {
        AnswerType::Number => number_eq(predicted, gold),
        AnswerType::Integer => matches!(
            (coerce_f64(predicted), coerce_f64(gold)),
            (Some(x), Some(y)) if x == y
        ),
        AnswerType::Boolean => matches!((as_bool(predicted), as_bool(gold)), (Some(x), Some(y)) if x == y),
        AnswerType::String => string_eq(predicted, gold, ctx),
        AnswerType::ListOfStrings => match (as_list(predicted), gold.as_array()) {
            (Some(p), Some(g)) => multiset_eq(&p, g, |a, b| {
                if b.is_number() {
                    number_eq(a, b)
                } else {
                    string_eq(a, b, ctx)
                }
            }),
            _ => false,
        },
    }
}
