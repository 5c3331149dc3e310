//! The twenty question templates, slot values, rendering, and dataset
//! generation.

mod dataset;
mod forms;
mod generate;

pub use dataset::{read_dataset, write_dataset, DatasetError, QuestionInstance};
pub use forms::template;
pub use generate::{
    instantiate_with, SlotDomains, TemplateReport, DEFAULT_REGION_LEVELS, MAX_AVERAGE_CHANGE_SPAN, THRESHOLDS, TOP_N_CHOICES,
    classify_availability, instantiate, sample_dataset, slot_inventory, Draft, GenerationConfig,
    GenerationError, GenerationReport, SlotInventory, RETRY_BUDGET,
};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::value::number;

macro_rules! template_ids {
    ($($id:ident),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum TemplateId { $($id),* }

        impl TemplateId {
            pub const ALL: [TemplateId; 20] = [$(TemplateId::$id),*];

            pub fn as_str(self) -> &'static str {
                match self { $(TemplateId::$id => stringify!($id)),* }
            }
        }

        impl std::str::FromStr for TemplateId {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s.trim() {
                    $(stringify!($id) => Ok(TemplateId::$id),)*
                    other => Err(format!("unknown template '{other}'")),
                }
            }
        }
    };
}

template_ids!(
    AverageChange,
    AverageProperty,
    AveragePropertyComparison,
    CountryPropertyComparison,
    CountryThresholdCount,
    PropertyOfSubject,
    PropertyRatioComparison,
    RankChange,
    RegionAverageComparison,
    RegionComparison,
    RegionComparisonResult,
    RegionPropertyChange,
    RegionPropertyRatio,
    RegionProportion,
    RegionProportionChange,
    RegionRangeComparison,
    SubjectPropertyChange,
    SubjectPropertyRank,
    TopNTotal,
    TotalProperty,
);

impl TemplateId {
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|t| *t == self).expect("listed")
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotKind {
    Subject,
    Region,
    Property,
    Year,
    Operator,
    N,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerType {
    Number,
    Integer,
    String,
    Boolean,
    ListOfStrings,
}

/// Data availability of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    AnswerableFull,
    Partial,
    Unanswerable,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::AnswerableFull => "answerable_full",
            Mode::Partial => "partial",
            Mode::Unanswerable => "unanswerable",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_lowercase().replace('-', "_").as_str() {
            "answerable_full" | "answerable" | "full" => Ok(Mode::AnswerableFull),
            "partial" => Ok(Mode::Partial),
            "unanswerable" => Ok(Mode::Unanswerable),
            other => Err(format!(
                "unknown mode '{other}' (expected answerable-full, partial or unanswerable)"
            )),
        }
    }
}

/// The two operator values. How they read depends on the template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Highest,
    Lowest,
}

impl Op {
    pub const ALL: [Op; 2] = [Op::Highest, Op::Lowest];
}

/// Surface words for [`Op`] in a given template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorStyle {
    /// highest / lowest
    Superlative,
    /// higher / lower
    Comparative,
    /// positive / negative
    Sign,
}

impl OperatorStyle {
    pub fn word(self, op: Op) -> &'static str {
        match (self, op) {
            (OperatorStyle::Superlative, Op::Highest) => "highest",
            (OperatorStyle::Superlative, Op::Lowest) => "lowest",
            (OperatorStyle::Comparative, Op::Highest) => "higher",
            (OperatorStyle::Comparative, Op::Lowest) => "lower",
            (OperatorStyle::Sign, Op::Highest) => "positive",
            (OperatorStyle::Sign, Op::Lowest) => "negative",
        }
    }
}

/// A concrete slot value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlotValue {
    Country { name: String, code: String },
    Region { name: String },
    /// `surface` is the phrase used in the question: a paraphrase or the raw
    /// name.
    Property { code: String, name: String, surface: String },
    Year { value: i32 },
    Operator { value: Op },
    Count { value: usize },
    Threshold { value: f64 },
}

impl SlotValue {
    pub fn render(&self, style: Option<OperatorStyle>) -> String {
        match self {
            SlotValue::Country { name, .. } | SlotValue::Region { name } => name.clone(),
            SlotValue::Property { surface, .. } => surface.clone(),
            SlotValue::Year { value } => value.to_string(),
            SlotValue::Operator { value } => style.unwrap_or(OperatorStyle::Superlative).word(*value).to_string(),
            SlotValue::Count { value } => value.to_string(),
            SlotValue::Threshold { value } => number(*value).to_string(),
        }
    }
}

pub type Slots = BTreeMap<String, SlotValue>;

/// Static description of one template.
#[derive(Debug, Clone)]
pub struct QuestionTemplate {
    pub id: TemplateId,
    pub slots: &'static [(&'static str, SlotKind)],
    /// 2 to 4 surface forms with `<slot>` markers; the first is canonical.
    pub forms: &'static [&'static str],
    pub answer_type: AnswerType,
    pub operator_style: Option<OperatorStyle>,
}

impl QuestionTemplate {
    pub fn slot_kind(&self, name: &str) -> Option<SlotKind> {
        self.slots.iter().find(|(n, _)| *n == name).map(|(_, k)| *k)
    }

    /// Substitutes every `<slot>` marker of form `form`.
    pub fn render(&self, form: usize, slots: &Slots) -> Result<String, String> {
        let mut out = String::new();
        let mut rest = self.forms[form];
        while let Some(start) = rest.find('<') {
            out.push_str(&rest[..start]);
            let end = rest[start..]
                .find('>')
                .ok_or_else(|| format!("{}: unterminated marker", self.id))?;
            let name = &rest[start + 1..start + end];
            let v = slots
                .get(name)
                .ok_or_else(|| format!("{}: no value for slot '{name}'", self.id))?;
            out.push_str(&v.render(self.operator_style));
            rest = &rest[start + end + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }
}

/// Markers appearing in a surface form.
pub fn markers(form: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = form;
    while let Some(start) = rest.find('<') {
        let Some(len) = rest[start..].find('>') else { break };
        out.push(&rest[start + 1..start + len]);
        rest = &rest[start + len + 1..];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_registry_is_complete() {
        assert_eq!(TemplateId::ALL.len(), 20);
        for id in TemplateId::ALL {
            let t = template(id);
            assert_eq!(t.id, id);
            assert!((2..=4).contains(&t.forms.len()), "{id}");
            for form in t.forms {
                for m in markers(form) {
                    assert!(t.slot_kind(m).is_some(), "{id}: <{m}> not declared");
                }
            }
            // every declared slot appears in the canonical form
            for (name, _) in t.slots {
                assert!(markers(t.forms[0]).contains(name), "{id}: {name} unused");
            }
            let has_op = t.slot_kind("operator").is_some();
            assert_eq!(has_op, t.operator_style.is_some(), "{id}");
            assert_eq!(id.as_str().parse::<TemplateId>().unwrap(), id);
        }
    }

    #[test]
    fn modes_parse() {
        assert_eq!("answerable-full".parse::<Mode>().unwrap(), Mode::AnswerableFull);
        assert_eq!("unanswerable".parse::<Mode>().unwrap(), Mode::Unanswerable);
        assert!("x".parse::<Mode>().is_err());
    }

    #[test]
    fn rendering_substitutes_all_markers() {
        let t = template(TemplateId::CountryThresholdCount);
        let mut slots = Slots::new();
        slots.insert("region".into(), SlotValue::Region { name: "Western Africa".into() });
        slots.insert("operator".into(), SlotValue::Operator { value: Op::Highest });
        slots.insert(
            "property".into(),
            SlotValue::Property {
                code: "IS.RRS.TOTL.KM".into(),
                name: "Rail lines (total route-km)".into(),
                surface: "railway route length".into(),
            },
        );
        slots.insert("subject".into(), SlotValue::Country { name: "Ghana".into(), code: "GHA".into() });
        slots.insert("year".into(), SlotValue::Year { value: 2006 });
        assert_eq!(
            t.render(0, &slots).unwrap(),
            "How many countries in Western Africa had a higher railway route length than Ghana in 2006?"
        );
    }
}
