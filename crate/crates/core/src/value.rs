//! JSON value helpers shared by tools, plans, and scoring.
//!
//! Tool payloads and arguments are plain [`serde_json::Value`]s. Numbers are
//! computed as `f64`; integral results are rendered without a decimal point.

use serde_json::Value;

/// Relative tolerance used when comparing numeric tool arguments.
pub const ARG_REL_TOL: f64 = 1e-9;

/// Converts an `f64` into a JSON number, using an integer representation when
/// the value is integral and exactly representable.
pub fn number(x: f64) -> Value {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 9.007_199_254_740_992e15 {
        // -0.0 renders as 0
        Value::from(x as i64)
    } else {
        serde_json::Number::from_f64(x)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
}

pub fn as_f64(v: &Value) -> Option<f64> {
    v.as_f64()
}

/// Numeric view that also accepts numeric strings such as `"2005"`.
pub fn coerce_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse::<f64>().ok().filter(|x| x.is_finite()),
        _ => None,
    }
}

/// Bare rendering of a value as it is shown to a model: strings without
/// quotes, everything else as compact JSON.
pub fn render(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Compact JSON rendering truncated to `max` characters.
pub fn render_short(v: &Value, max: usize) -> String {
    let s = v.to_string();
    truncate_chars(&s, max)
}

pub fn truncate_chars(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        return s.to_string();
    }
    let mut out: String = s.chars().take(max.saturating_sub(3)).collect();
    out.push_str("...");
    out
}

/// `a` and `b` equal within relative tolerance `rel` (absolute `rel` near zero).
pub fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    approx_eq_abs(a, b, rel, rel)
}

/// `|a - b| <= max(rel * max(|a|, |b|), abs)`.
pub fn approx_eq_abs(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    if a == b {
        return true;
    }
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= (rel * scale).max(abs)
}

pub fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Semantic equality for tool arguments: numbers within [`ARG_REL_TOL`],
/// numeric strings equal to numbers, strings compared after case-folding and
/// trimming. Arrays compare as multisets when `lists_as_multisets` is set.
pub fn semantic_eq(a: &Value, b: &Value, lists_as_multisets: bool) -> bool {
    match (a, b) {
        (Value::Null, Value::Null) => true,
        (Value::Bool(x), Value::Bool(y)) => x == y,
        (Value::Number(_), _) | (_, Value::Number(_)) => match (coerce_f64(a), coerce_f64(b)) {
            (Some(x), Some(y)) => approx_eq(x, y, ARG_REL_TOL),
            _ => false,
        },
        (Value::String(x), Value::String(y)) => fold(x) == fold(y),
        (Value::Array(xs), Value::Array(ys)) => {
            if xs.len() != ys.len() {
                return false;
            }
            if lists_as_multisets {
                multiset_eq(xs, ys, |p, q| semantic_eq(p, q, true))
            } else {
                xs.iter().zip(ys).all(|(p, q)| semantic_eq(p, q, false))
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len()
                && x.iter().all(|(k, v)| {
                    y.get(k)
                        .is_some_and(|w| semantic_eq(v, w, lists_as_multisets))
                })
        }
        _ => false,
    }
}

/// Multiset equality under an arbitrary element equivalence (greedy pairing).
pub fn multiset_eq<T>(xs: &[T], ys: &[T], eq: impl Fn(&T, &T) -> bool) -> bool {
    if xs.len() != ys.len() {
        return false;
    }
    let mut used = vec![false; ys.len()];
    'outer: for x in xs {
        for (j, y) in ys.iter().enumerate() {
            if !used[j] && eq(x, y) {
                used[j] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Alphanumeric lower-case tokens of `s`, in order of first appearance.
pub fn tokens(s: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in s
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
    {
        if !out.contains(&t) {
            out.push(t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn integral_numbers_render_without_decimal_point() {
        assert_eq!(number(5.0).to_string(), "5");
        assert_eq!(number(-2.0).to_string(), "-2");
        assert_eq!(number(-0.0).to_string(), "0");
        assert_eq!(number(2.5).to_string(), "2.5");
        assert_eq!(number(1e20).to_string(), "1e+20");
    }

    #[test]
    fn semantic_equality_rules() {
        assert!(semantic_eq(&json!(2005), &json!("2005"), false));
        assert!(semantic_eq(&json!("Ghana "), &json!("ghana"), false));
        assert!(semantic_eq(&json!(1.0), &json!(1.0 + 1e-12), false));
        assert!(!semantic_eq(&json!(1.0), &json!(1.001), false));
        assert!(semantic_eq(&json!([1, 2]), &json!([2, 1]), true));
        assert!(!semantic_eq(&json!([1, 2]), &json!([2, 1]), false));
        assert!(!semantic_eq(&json!([1, 1, 2]), &json!([1, 2, 2]), true));
        assert!(!semantic_eq(&json!(true), &json!("true"), false));
    }

    #[test]
    fn approx_eq_near_zero_is_absolute() {
        assert!(approx_eq(0.0, 1e-10, 1e-9));
        assert!(!approx_eq(0.0, 1e-8, 1e-9));
        assert!(approx_eq(1e9, 1e9 + 0.5, 1e-9));
        assert!(!approx_eq(1e9, 1e9 + 5.0, 1e-9));
    }

    #[test]
    fn tokens_are_deduplicated_and_folded() {
        assert_eq!(
            tokens("School enrolment, secondary (% gross) school"),
            vec!["school", "enrolment", "secondary", "gross"]
        );
    }
}
