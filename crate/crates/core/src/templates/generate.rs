//! Slot sampling, availability classification and dataset sampling.

use std::collections::{BTreeMap, HashSet};

use rand::seq::IndexedRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;
use tracing::warn;

use super::{template, Mode, Op, QuestionInstance, SlotKind, SlotValue, Slots, TemplateId};
use crate::oracle::{execute_plan, plan_for, PlanError, PlanOutcome, SolutionPlan};
use crate::wb_data::{CountryMeta, DataContext, IndicatorMeta, Region, RegionLevel};

/// Attempts allowed per instance, both for slot constraints and for finding
/// an instance of the requested mode.
pub const RETRY_BUDGET: usize = 200;

pub const DEFAULT_REGION_LEVELS: [RegionLevel; 2] = [RegionLevel::Region, RegionLevel::SubRegion];

pub const TOP_N_CHOICES: [usize; 3] = [2, 3, 5];
pub const THRESHOLDS: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];
/// Longest span, in years, of an AverageChange question.
pub const MAX_AVERAGE_CHANGE_SPAN: i32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationConfig {
    pub n_per_template: usize,
    pub mode: Mode,
    pub seed: u64,
    pub region_levels: Vec<RegionLevel>,
    pub templates: Vec<TemplateId>,
}

impl GenerationConfig {
    pub fn new(n_per_template: usize, mode: Mode, seed: u64) -> Self {
        Self {
            n_per_template,
            mode,
            seed,
            region_levels: DEFAULT_REGION_LEVELS.to_vec(),
            templates: TemplateId::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerationError {
    #[error("{template}: no candidates for slot '{slot}'")]
    EmptyDomain { template: TemplateId, slot: String },
    #[error("{template}: no valid slot assignment within {attempts} attempts")]
    Exhausted { template: TemplateId, attempts: usize },
}

/// A rendered question before classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Draft {
    pub template: TemplateId,
    pub slots: Slots,
    pub form: usize,
    pub text: String,
}

/// Candidate values for each slot kind.
#[derive(Debug, Clone)]
pub struct SlotDomains<'a> {
    pub ctx: &'a DataContext,
    pub subjects: Vec<&'a CountryMeta>,
    pub regions: Vec<&'a Region>,
    pub properties: Vec<&'a IndicatorMeta>,
    pub years: Vec<i32>,
}

impl<'a> SlotDomains<'a> {
    /// Regions at `levels` with at least two members; indicators that have
    /// data and names free of `<`.
    pub fn new(ctx: &'a DataContext, levels: &[RegionLevel]) -> Self {
        Self {
            ctx,
            subjects: ctx.countries().iter().collect(),
            regions: ctx
                .regions()
                .iter()
                .filter(|r| levels.contains(&r.level) && r.members.len() >= 2)
                .collect(),
            properties: ctx
                .catalogue()
                .iter()
                .filter(|i| ctx.table(&i.code).is_some_and(|t| !t.is_empty()))
                .filter(|i| i.all_names().all(|n| !n.contains('<') && !n.contains('>')))
                .collect(),
            years: ctx.years().iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SlotInventory {
    pub subjects: usize,
    pub regions: usize,
    pub properties: usize,
    pub years: usize,
    pub operators: usize,
}

pub fn slot_inventory(ctx: &DataContext, levels: &[RegionLevel]) -> SlotInventory {
    let d = SlotDomains::new(ctx, levels);
    SlotInventory {
        subjects: d.subjects.len(),
        regions: d.regions.len(),
        properties: d.properties.len(),
        years: d.years.len(),
        operators: Op::ALL.len(),
    }
}

/// Templates whose subject must belong to the sampled region.
fn subject_in_region(id: TemplateId) -> bool {
    matches!(
        id,
        TemplateId::RankChange
            | TemplateId::RegionProportion
            | TemplateId::RegionProportionChange
            | TemplateId::SubjectPropertyRank
    )
}

/// Templates whose two years must be in increasing order.
fn ordered_years(id: TemplateId) -> bool {
    matches!(
        id,
        TemplateId::AverageChange
            | TemplateId::RankChange
            | TemplateId::RegionPropertyChange
            | TemplateId::SubjectPropertyChange
    )
}

/// One attempt at a slot assignment; `None` when a constraint fails.
fn sample_slots(id: TemplateId, d: &SlotDomains, rng: &mut ChaCha8Rng) -> Result<Option<Slots>, GenerationError> {
    let t = template(id);
    let empty = |slot: &str| GenerationError::EmptyDomain {
        template: id,
        slot: slot.to_string(),
    };
    let mut slots = Slots::new();

    // regions first: subjects and n depend on them
    for (name, kind) in t.slots.iter().filter(|(_, k)| *k == SlotKind::Region) {
        let r = d.regions.choose(rng).ok_or_else(|| empty(name))?;
        if slots.values().any(|v| matches!(v, SlotValue::Region { name } if *name == r.name)) {
            return Ok(None);
        }
        debug_assert_eq!(*kind, SlotKind::Region);
        slots.insert(name.to_string(), SlotValue::Region { name: r.name.clone() });
    }
    let region = t
        .slots
        .iter()
        .find(|(_, k)| *k == SlotKind::Region)
        .and_then(|(n, _)| match &slots[*n] {
            SlotValue::Region { name } => d.ctx.regions().get(name),
            _ => None,
        });

    let years: Vec<&str> = t
        .slots
        .iter()
        .filter(|(_, k)| *k == SlotKind::Year)
        .map(|(n, _)| *n)
        .collect();
    if d.years.is_empty() {
        return Err(empty(years.first().copied().unwrap_or("year")));
    }
    match years.as_slice() {
        [one] => {
            slots.insert(one.to_string(), SlotValue::Year { value: *d.years.choose(rng).unwrap() });
        }
        [first, second] => {
            if d.years.len() < 2 {
                return Err(empty(second));
            }
            let (a, b) = if id == TemplateId::AverageChange {
                let a = d.years[rng.random_range(0..d.years.len() - 1)];
                let last = (a + MAX_AVERAGE_CHANGE_SPAN).min(*d.years.last().unwrap());
                (a, rng.random_range(a + 1..=last))
            } else {
                let picked: Vec<i32> = d.years.choose_multiple(rng, 2).copied().collect();
                if ordered_years(id) {
                    (picked[0].min(picked[1]), picked[0].max(picked[1]))
                } else {
                    (picked[0], picked[1])
                }
            };
            slots.insert(first.to_string(), SlotValue::Year { value: a });
            slots.insert(second.to_string(), SlotValue::Year { value: b });
        }
        _ => {}
    }

    for (name, kind) in t.slots {
        let v = match kind {
            SlotKind::Region | SlotKind::Year => continue,
            SlotKind::Property => {
                let p = d.properties.choose(rng).ok_or_else(|| empty(name))?;
                let surface = p.paraphrases.choose(rng).cloned().unwrap_or_else(|| p.name.clone());
                SlotValue::Property {
                    code: p.code.to_string(),
                    name: p.name.clone(),
                    surface,
                }
            }
            SlotKind::Subject => {
                let c = if subject_in_region(id) {
                    let r = region.ok_or_else(|| empty(name))?;
                    let code = r.members.iter().nth(rng.random_range(0..r.members.len())).unwrap();
                    d.ctx.country(code).ok_or_else(|| empty(name))?
                } else {
                    *d.subjects.choose(rng).ok_or_else(|| empty(name))?
                };
                let taken = slots
                    .values()
                    .any(|v| matches!(v, SlotValue::Country { code, .. } if *code == c.code.as_str()));
                if taken {
                    return Ok(None);
                }
                SlotValue::Country {
                    name: c.name.clone(),
                    code: c.code.to_string(),
                }
            }
            SlotKind::Operator => SlotValue::Operator { value: *Op::ALL.choose(rng).unwrap() },
            SlotKind::N => {
                let n = *TOP_N_CHOICES.choose(rng).unwrap();
                if region.is_none_or(|r| n >= r.members.len()) {
                    return Ok(None);
                }
                SlotValue::Count { value: n }
            }
            SlotKind::Threshold => SlotValue::Threshold { value: *THRESHOLDS.choose(rng).unwrap() },
        };
        slots.insert(name.to_string(), v);
    }
    Ok(Some(slots))
}

/// Samples and renders one draft. Deterministic for a fixed seed.
pub fn instantiate_with(id: TemplateId, domains: &SlotDomains, seed: u64) -> Result<Draft, GenerationError> {
    let t = template(id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RETRY_BUDGET {
        let Some(slots) = sample_slots(id, domains, &mut rng)? else {
            continue;
        };
        let form = rng.random_range(0..t.forms.len());
        let text = t.render(form, &slots).expect("every declared slot is sampled");
        return Ok(Draft {
            template: id,
            slots,
            form,
            text,
        });
    }
    Err(GenerationError::Exhausted {
        template: id,
        attempts: RETRY_BUDGET,
    })
}

pub fn instantiate(
    id: TemplateId,
    ctx: &DataContext,
    levels: &[RegionLevel],
    seed: u64,
) -> Result<Draft, GenerationError> {
    instantiate_with(id, &SlotDomains::new(ctx, levels), seed)
}

/// Data availability of a draft under its plan. Degenerate drafts have all
/// their data and classify as `AnswerableFull`.
pub fn classify_availability(draft: &Draft, plan: &SolutionPlan, ctx: &DataContext) -> Mode {
    match execute_plan(plan, &draft.slots, ctx) {
        Ok(PlanOutcome::Answered { .. }) | Err(PlanError::Degenerate(_)) => Mode::AnswerableFull,
        Ok(PlanOutcome::Partial { .. }) => Mode::Partial,
        Ok(PlanOutcome::Unanswerable { .. }) => Mode::Unanswerable,
        Err(e @ PlanError::Authoring(_)) => {
            warn!("{}: {e}", draft.template);
            Mode::Unanswerable
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TemplateReport {
    pub requested: usize,
    pub produced: usize,
    pub attempts: usize,
    pub wrong_mode: usize,
    pub degenerate: usize,
    pub duplicates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GenerationReport {
    pub templates: BTreeMap<TemplateId, TemplateReport>,
}

impl GenerationReport {
    /// Templates that fell short of their quota, with the missing count.
    pub fn shortfall(&self) -> BTreeMap<TemplateId, usize> {
        self.templates
            .iter()
            .filter(|(_, r)| r.produced < r.requested)
            .map(|(t, r)| (*t, r.requested - r.produced))
            .collect()
    }
}

/// Identity of a slot assignment, ignoring the property's surface wording.
fn assignment_key(slots: &Slots) -> String {
    let mut key = String::new();
    for (name, v) in slots {
        let v = match v {
            SlotValue::Property { code, .. } => code.clone(),
            other => serde_json::to_string(other).expect("slot serialises"),
        };
        key.push_str(name);
        key.push('=');
        key.push_str(&v);
        key.push(';');
    }
    key
}

/// Samples `n_per_template` instances of `mode` for each template. Each
/// template draws from its own seed stream. Templates that run out of
/// attempts contribute what they have; the report lists the shortfall.
pub fn sample_dataset(ctx: &DataContext, config: &GenerationConfig) -> (Vec<QuestionInstance>, GenerationReport) {
    let domains = SlotDomains::new(ctx, &config.region_levels);
    let mut out = Vec::new();
    let mut report = GenerationReport::default();
    for &id in &config.templates {
        let (mut instances, r) = sample_template(id, &domains, config);
        report.templates.insert(id, r);
        out.append(&mut instances);
    }
    for (t, missing) in report.shortfall() {
        let r = &report.templates[&t];
        warn!(
            "{t}: produced {} of {} {} instances ({missing} short){}",
            r.produced,
            r.requested,
            config.mode,
            r.error.as_ref().map(|e| format!(": {e}")).unwrap_or_default()
        );
    }
    (out, report)
}

fn sample_template(
    id: TemplateId,
    domains: &SlotDomains,
    config: &GenerationConfig,
) -> (Vec<QuestionInstance>, TemplateReport) {
    let t = template(id);
    let plan = plan_for(id);
    let mut stream = ChaCha8Rng::seed_from_u64(config.seed);
    stream.set_stream(id.index() as u64);
    let mut report = TemplateReport {
        requested: config.n_per_template,
        ..Default::default()
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut failures = 0;
    while out.len() < config.n_per_template {
        if failures >= RETRY_BUDGET {
            break;
        }
        report.attempts += 1;
        let draft = match instantiate_with(id, domains, stream.next_u64()) {
            Ok(d) => d,
            Err(e) => {
                report.error = Some(e.to_string());
                break;
            }
        };
        let key = assignment_key(&draft.slots);
        if seen.contains(&key) {
            report.duplicates += 1;
            failures += 1;
            continue;
        }
        let (mode, answer, essential) = match execute_plan(&plan, &draft.slots, domains.ctx) {
            Ok(PlanOutcome::Answered { answer, essential }) => (Mode::AnswerableFull, Some(answer), essential),
            Ok(PlanOutcome::Partial { .. }) => (Mode::Partial, None, Vec::new()),
            Ok(PlanOutcome::Unanswerable { .. }) => (Mode::Unanswerable, None, Vec::new()),
            Err(PlanError::Degenerate(_)) => {
                report.degenerate += 1;
                failures += 1;
                continue;
            }
            Err(e @ PlanError::Authoring(_)) => {
                report.error = Some(e.to_string());
                break;
            }
        };
        if mode != config.mode {
            report.wrong_mode += 1;
            failures += 1;
            continue;
        }
        seen.insert(key);
        failures = 0;
        out.push(QuestionInstance {
            question_id: format!("{id}_{}_{:03}", config.mode, out.len()),
            template: id,
            slots: draft.slots,
            text: draft.text,
            mode,
            answer_type: t.answer_type,
            answer,
            essential_actions: essential,
        });
    }
    report.produced = out.len();
    (out, report)
}
