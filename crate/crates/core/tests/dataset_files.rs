//! Dataset files reproduce instances exactly, floats included.

use metaqa_core::fixtures::synthetic_context;
use metaqa_core::templates::{read_dataset, sample_dataset, write_dataset, GenerationConfig, Mode};
use metaqa_core::value::number;
use proptest::prelude::*;

#[test]
fn write_then_read_is_identity() {
    let ctx = synthetic_context(8);
    let dir = tempfile::tempdir().unwrap();
    for mode in [Mode::AnswerableFull, Mode::Unanswerable] {
        let (qs, _) = sample_dataset(&ctx, &GenerationConfig::new(5, mode, 3));
        let path = dir.path().join(format!("{mode}.jsonl"));
        write_dataset(&path, &qs).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), qs);
        let first = std::fs::read(&path).unwrap();
        write_dataset(&path, &read_dataset(&path).unwrap()).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first);
    }
}

#[test]
fn duplicate_ids_are_rejected() {
    let ctx = synthetic_context(8);
    let (mut qs, _) = sample_dataset(&ctx, &GenerationConfig::new(1, Mode::AnswerableFull, 3));
    qs.push(qs[0].clone());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    write_dataset(&path, &qs).unwrap();
    let err = read_dataset(&path).unwrap_err().to_string();
    assert!(err.contains("duplicate question_id"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn floats_survive_json(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = serde_json::to_string(&number(x)).unwrap();
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.as_f64().unwrap(), x);
    }
}
