//! Plans and the direct computation agree on every template.

use metaqa_core::fixtures::{synthetic_context, tiny_context};
use metaqa_core::oracle::{brute_force_answer, execute_plan, plan_for, PlanOutcome};
use metaqa_core::templates::{sample_dataset, GenerationConfig, Mode, TemplateId};
use metaqa_core::value::approx_eq;
use metaqa_core::wb_data::{DataContext, RegionLevel};
use serde_json::Value;

fn agree(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            approx_eq(x.as_f64().unwrap(), y.as_f64().unwrap(), 1e-9)
        }
        _ => a == b,
    }
}

fn check(ctx: &DataContext, config: &GenerationConfig) -> usize {
    let (qs, report) = sample_dataset(ctx, config);
    assert!(report.shortfall().is_empty(), "{:?}", report.shortfall());
    for q in &qs {
        let out = execute_plan(&plan_for(q.template), &q.slots, ctx).unwrap();
        let PlanOutcome::Answered { answer, essential } = out else {
            panic!("{}: {out:?}", q.question_id)
        };
        assert_eq!(Some(&answer), q.answer.as_ref(), "plans are deterministic");
        assert_eq!(essential, q.essential_actions);
        let brute = brute_force_answer(q.template, &q.slots, ctx).unwrap();
        assert!(agree(&answer, &brute), "{} ({}): plan {answer} vs direct {brute}", q.question_id, q.text);
        assert!(essential.iter().all(|a| a.tool != "less_than"));
    }
    qs.len()
}

#[test]
fn all_templates_on_synthetic_data() {
    for seed in [1, 2] {
        let ctx = synthetic_context(seed);
        let n = check(&ctx, &GenerationConfig::new(8, Mode::AnswerableFull, seed * 31));
        assert_eq!(n, 8 * TemplateId::ALL.len());
    }
}

#[test]
fn all_templates_on_tiny_fixture() {
    let ctx = tiny_context();
    let mut config = GenerationConfig::new(2, Mode::AnswerableFull, 4);
    config.region_levels = RegionLevel::ALL.to_vec();
    assert_eq!(check(&ctx, &config), 40);
}
