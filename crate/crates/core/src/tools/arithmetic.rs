//! Elementary arithmetic over `f64`. All functions are pure; results that
//! overflow to a non-finite value are reported as `ArithmeticError`.

use serde_json::Value;

use super::ToolError;
use crate::value::{coerce_f64, render_short};

fn finite(x: f64, op: &str) -> Result<f64, ToolError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ToolError::arithmetic(format!("{op} result is not a finite number")))
    }
}

fn non_empty(values: &[f64], op: &str) -> Result<(), ToolError> {
    if values.is_empty() {
        Err(ToolError::arithmetic(format!("{op} of an empty list (values=[])")))
    } else {
        Ok(())
    }
}

pub fn add(values: &[f64]) -> Result<f64, ToolError> {
    non_empty(values, "add")?;
    finite(values.iter().sum(), "add")
}

pub fn subtract(a: f64, b: f64) -> Result<f64, ToolError> {
    finite(a - b, "subtract")
}

pub fn greater_than(a: f64, b: f64) -> bool {
    a > b
}

pub fn less_than(a: f64, b: f64) -> bool {
    a < b
}

pub fn multiply(values: &[f64]) -> Result<f64, ToolError> {
    non_empty(values, "multiply")?;
    finite(values.iter().product(), "multiply")
}

pub fn divide(a: f64, b: f64) -> Result<f64, ToolError> {
    if b == 0.0 {
        return Err(ToolError::arithmetic(format!("division by zero (value_a={a}, value_b=0)")));
    }
    finite(a / b, "divide")
}

/// Mean of the non-null entries.
pub fn mean(values: &[Option<f64>]) -> Result<f64, ToolError> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        return Err(ToolError::arithmetic("mean of an empty (or all-null) list"));
    }
    finite(present.iter().sum::<f64>() / present.len() as f64, "mean")
}

pub fn maximum(values: &[f64]) -> Result<f64, ToolError> {
    non_empty(values, "maximum")?;
    Ok(values.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

pub fn minimum(values: &[f64]) -> Result<f64, ToolError> {
    non_empty(values, "minimum")?;
    Ok(values.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Number of non-null elements.
pub fn count(values: &[Value]) -> usize {
    values.iter().filter(|v| !v.is_null()).count()
}

/// 1-based rank of `query` among `values` sorted descending: one plus the
/// number of strictly greater values.
pub fn rank(values: &[f64], query: f64) -> Result<usize, ToolError> {
    if !values.contains(&query) {
        return Err(ToolError::not_found(format!("query_value {query} is not in values")));
    }
    Ok(1 + values.iter().filter(|&&x| x > query).count())
}

/// Ascending sort.
pub fn sort(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    out.sort_by(f64::total_cmp);
    out
}

/// 0-based index of the first element equal to `query`. Numbers compare
/// numerically, strings exactly.
pub fn index(values: &[Value], query: Value) -> Result<usize, ToolError> {
    let eq = |v: &Value| match (v, &query) {
        (Value::Number(_), Value::Number(_)) => coerce_f64(v) == coerce_f64(&query),
        _ => v == &query,
    };
    values.iter().position(eq).ok_or_else(|| {
        ToolError::not_found(format!(
            "query_value {} is not in values",
            render_short(&query, 80)
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn examples() {
        assert_eq!(add(&[2.0, 3.0]).unwrap(), 5.0);
        assert_eq!(add(&[1.5, -1.5]).unwrap(), 0.0);
        assert!(add(&[]).is_err());
        assert_eq!(subtract(5.0, 3.0).unwrap(), 2.0);
        assert_eq!(subtract(3.0, 5.0).unwrap(), -2.0);
        assert!(greater_than(5.0, 3.0));
        assert!(!greater_than(3.0, 3.0));
        assert!(less_than(3.0, 5.0));
        assert!(!less_than(5.0, 5.0));
        assert_eq!(multiply(&[2.0, 3.0, 4.0]).unwrap(), 24.0);
        assert_eq!(divide(6.0, 3.0).unwrap(), 2.0);
        assert!(divide(1.0, 0.0).is_err());
        assert_eq!(mean(&[Some(2.0), Some(4.0)]).unwrap(), 3.0);
        assert_eq!(mean(&[Some(2.0), None, Some(4.0)]).unwrap(), 3.0);
        assert!(mean(&[None, None]).is_err());
        assert_eq!(maximum(&[-1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(minimum(&[-1.0, 0.0]).unwrap(), -1.0);
        assert_eq!(count(&[json!(1), Value::Null, json!(3)]), 2);
        assert_eq!(count(&[]), 0);
        assert_eq!(count(&[Value::Null]), 0);
        assert_eq!(sort(&[3.0, 1.0, 2.0]), vec![1.0, 2.0, 3.0]);
        assert!(sort(&[]).is_empty());
    }

    #[test]
    fn rank_ties_count_strictly_greater() {
        assert_eq!(rank(&[10.0, 5.0, 8.0], 8.0).unwrap(), 2);
        assert_eq!(rank(&[7.0], 7.0).unwrap(), 1);
        assert_eq!(rank(&[5.0, 5.0, 3.0], 5.0).unwrap(), 1);
        assert!(rank(&[1.0], 2.0).is_err());
    }

    #[test]
    fn index_first_occurrence() {
        assert_eq!(index(&[json!(4), json!(7), json!(9)], json!(7)).unwrap(), 1);
        assert_eq!(index(&[json!(7), json!(7)], json!(7)).unwrap(), 0);
        assert_eq!(index(&[json!(7.0)], json!(7)).unwrap(), 0);
        assert_eq!(index(&[json!("GHA"), json!("FRA")], json!("FRA")).unwrap(), 1);
        assert!(index(&[json!(1)], json!(2)).is_err());
    }

    #[test]
    fn overflow_is_an_error() {
        assert!(multiply(&[1e300, 1e300]).is_err());
        assert!(add(&[f64::MAX, f64::MAX]).is_err());
    }
}
