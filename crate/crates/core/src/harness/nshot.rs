//! Randomly argued tool examples for few-shot prompts.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::tools::{self, is_utility, Registry, ToolCall, ToolMode, ToolSpec};
use crate::value::{number, tokens};
use crate::wb_data::DataContext;

/// Tries per example before giving up on a tool.
const ARG_ATTEMPTS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct NShotExample {
    pub call: ToolCall,
    /// The rendered output of actually executing `call`.
    pub output: String,
}

impl NShotExample {
    pub fn render(&self) -> String {
        format!("{}({}) -> {}", self.call.name, self.call.args, self.output)
    }
}

fn amount(rng: &mut ChaCha8Rng) -> f64 {
    f64::from(rng.random_range(1..100_000)) / 100.0
}

fn amounts(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(2..=5);
    (0..n).map(|_| amount(rng)).collect()
}

fn list(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| number(*x)).collect())
}

/// Arguments drawn from values the context is known to hold, so that the
/// call succeeds.
fn random_args(name: &str, ctx: &DataContext, rng: &mut ChaCha8Rng) -> Option<Value> {
    let country = ctx.countries().choose(rng)?;
    let indicator = ctx.catalogue().choose(rng)?;
    Some(match name {
        tools::SEARCH => {
            let words = tokens(&indicator.name);
            let k = rng.random_range(1..=words.len().min(2));
            json!({ "keywords": words.choose_multiple(rng, k).cloned().collect::<Vec<_>>() })
        }
        tools::COUNTRY_CODE => json!({ "country_name": country.name }),
        tools::COUNTRY_NAME => json!({ "country_code": country.code.as_str() }),
        tools::INDICATOR_CODE => json!({ "indicator_name": indicator.name }),
        tools::INDICATOR_NAME => json!({ "indicator_code": indicator.code.as_str() }),
        tools::REGION_CODES => {
            let regions: Vec<_> = ctx.regions().iter().collect();
            json!({ "region": regions.choose(rng)?.name })
        }
        tools::RETRIEVE => {
            let tables: Vec<_> = ctx.tables().values().filter(|t| !t.is_empty()).collect();
            let table = tables.choose(rng)?;
            let (c, y, _) = table.iter().nth(rng.random_range(0..table.len()))?;
            json!({ "country_code": c.as_str(), "indicator_code": table.indicator.as_str(), "year": y })
        }
        "add" | "multiply" | "mean" | "maximum" | "minimum" | "sort" | "count" => {
            json!({ "values": list(&amounts(rng)) })
        }
        "subtract" | "greater_than" | "less_than" | "divide" => {
            json!({ "value_a": number(amount(rng)), "value_b": number(amount(rng)) })
        }
        "rank" | "index" => {
            let xs = amounts(rng);
            let q = *xs.choose(rng)?;
            json!({ "values": list(&xs), "query_value": number(q) })
        }
        _ => return None,
    })
}

/// `n` examples for each non-utility tool in `specs`, in spec order.
/// Deterministic for a fixed seed.
pub fn nshot_examples(specs: &[ToolSpec], n: usize, seed: u64, ctx: &DataContext) -> Vec<NShotExample> {
    let registry = Registry::new(ToolMode::All);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for spec in specs.iter().filter(|s| !is_utility(s.name)) {
        for _ in 0..n {
            for _ in 0..ARG_ATTEMPTS {
                let Some(args) = random_args(spec.name, ctx, &mut rng) else {
                    break;
                };
                let call = ToolCall::new("", spec.name, args);
                let outcome = registry.execute(&call, ctx);
                if !outcome.is_error() {
                    out.push(NShotExample {
                        call,
                        output: outcome.render(),
                    });
                    break;
                }
            }
        }
    }
    out
}

pub fn render_examples(examples: &[NShotExample]) -> String {
    examples.iter().map(NShotExample::render).collect::<Vec<_>>().join("\n")
}
