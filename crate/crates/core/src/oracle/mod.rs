//! Gold answers and essential actions from hand-authored solution plans.
//!
//! A [`SolutionPlan`] is a straight-line program over the tool registry.
//! Steps bind named variables; a variable holds either a scalar JSON value or
//! a keyed list (one entry per country or year). [`execute_plan`] runs every
//! call through [`Registry::execute_named`] and records each successful
//! non-utility call as an [`EssentialAction`].

mod brute;
mod plans;

pub use brute::brute_force_answer;
pub use plans::plan_for;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::templates::{template, Op, SlotValue, Slots, TemplateId};
use crate::tools::{is_utility, ErrorKind, Registry, ToolMode, SEARCH};
use crate::value::{fold, number, semantic_eq, tokens};
use crate::wb_data::DataContext;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    /// The slots admit no well-defined answer (tied extremes, division by
    /// zero, indicator not found by search). Samplers reject these.
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    /// The plan itself is wrong: bad references or a tool misuse.
    #[error("plan authoring error: {0}")]
    Authoring(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    Multiset,
    /// Search calls: matched when the call returned one of `expect`.
    Predicate,
}

/// One expected tool call with its argument matcher.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssentialAction {
    pub tool: String,
    pub args: Value,
    #[serde(rename = "match")]
    pub matcher: MatchKind,
    /// Indicator names accepted by a predicate matcher.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expect: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome {
    Answered {
        answer: Value,
        essential: Vec<EssentialAction>,
    },
    /// Some aggregate inputs were missing and skipped.
    Partial { dropped: usize },
    /// A datum the plan cannot do without is missing.
    Unanswerable { missing: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToolChoice {
    Fixed(&'static str),
    /// Tool picked by the `operator` slot.
    ByOperator {
        highest: &'static str,
        lowest: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Slot(&'static str),
    Var(&'static str),
    Lit(f64),
    /// Value of the current entry inside `Map` / `Windows`.
    Item,
    /// Value of the previous entry inside `Windows`.
    Prev,
    /// Value of the named list at the current entry's key.
    Zip(&'static str),
    /// Word tokens of a property slot's surface text.
    Keywords(&'static str),
    /// Argument picked by the `operator` slot.
    ByOperator { highest: Box<Arg>, lowest: Box<Arg> },
}

impl Arg {
    pub fn by_op(highest: Arg, lowest: Arg) -> Arg {
        Arg::ByOperator {
            highest: Box::new(highest),
            lowest: Box::new(lowest),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Var(&'static str),
    /// Inclusive range between two year slots.
    YearRange(&'static str, &'static str),
}

/// What a `Map` does when a call reports `NoData`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnMissing {
    /// Skip the entry; the instance becomes partial.
    Drop,
    /// The instance is unanswerable.
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BindOp {
    /// The property's raw name, provided the search hits contain it.
    IndicatorFromSearch { hits: &'static str, property: &'static str },
    /// Key of the list entry at a 0-based index.
    At { list: &'static str, index: &'static str },
    /// Entries whose value differs from a scalar.
    Exclude { list: &'static str, value: &'static str },
    /// Entries whose key maps to `true` in `mask`.
    Filter { list: &'static str, mask: &'static str },
    /// Keys of the `n` highest or lowest values, read off an ascending sort,
    /// in descending value order.
    TopKeys {
        sorted: &'static str,
        list: &'static str,
        n: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    /// Exactly one entry of `list` equals `extreme`.
    UniqueExtreme { list: &'static str, extreme: &'static str },
    /// The top (or bottom) `n` of an ascending sort is separated from the rest.
    DistinctBoundary { sorted: &'static str, n: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Call {
        bind: &'static str,
        tool: ToolChoice,
        args: Vec<(&'static str, Arg)>,
    },
    Map {
        bind: &'static str,
        over: Source,
        tool: ToolChoice,
        args: Vec<(&'static str, Arg)>,
        on_missing: OnMissing,
    },
    /// One call per consecutive pair of entries, keyed by the later entry.
    Windows {
        bind: &'static str,
        over: &'static str,
        tool: ToolChoice,
        args: Vec<(&'static str, Arg)>,
    },
    Bind { bind: &'static str, op: BindOp },
    Guard(Guard),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnswerExpr {
    Var(&'static str),
    /// Whether two scalars differ.
    Differs(&'static str, &'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPlan {
    pub template: TemplateId,
    pub steps: Vec<Step>,
    pub answer: AnswerExpr,
}

impl SolutionPlan {
    /// Tool names the plan can invoke.
    pub fn tools(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for step in &self.steps {
            let choice = match step {
                Step::Call { tool, .. } | Step::Map { tool, .. } | Step::Windows { tool, .. } => tool,
                _ => continue,
            };
            match choice {
                ToolChoice::Fixed(t) => out.push(*t),
                ToolChoice::ByOperator { highest, lowest } => out.extend([*highest, *lowest]),
            }
        }
        out
    }

    /// Static checks: registered tools, declared slots, variables bound
    /// before use, `Item`/`Prev`/`Zip` only where an entry is in scope.
    pub fn validate(&self) -> Result<(), PlanError> {
        let t = template(self.template);
        let registry = Registry::new(ToolMode::All);
        let err = |m: String| Err(PlanError::Authoring(format!("{}: {m}", self.template)));
        let mut bound: Vec<&str> = Vec::new();
        let has_op = t.slot_kind("operator").is_some();

        fn check_arg(
            a: &Arg,
            bound: &[&str],
            slot_ok: &dyn Fn(&str) -> bool,
            in_map: bool,
            in_window: bool,
            has_op: bool,
        ) -> Result<(), String> {
            match a {
                Arg::Slot(s) | Arg::Keywords(s) if !slot_ok(s) => Err(format!("undeclared slot '{s}'")),
                Arg::Var(v) | Arg::Zip(v) if !bound.contains(v) => Err(format!("'{v}' used before binding")),
                Arg::Item if !(in_map || in_window) => Err("Item outside Map/Windows".into()),
                Arg::Prev if !in_window => Err("Prev outside Windows".into()),
                Arg::Zip(_) if !in_map => Err("Zip outside Map".into()),
                Arg::ByOperator { .. } if !has_op => Err("operator argument without operator slot".into()),
                Arg::ByOperator { highest, lowest } => {
                    check_arg(highest, bound, slot_ok, in_map, in_window, has_op)?;
                    check_arg(lowest, bound, slot_ok, in_map, in_window, has_op)
                }
                _ => Ok(()),
            }
        }
        let slot_ok = |s: &str| t.slot_kind(s).is_some();

        for step in &self.steps {
            let (tool, args, in_map, in_window) = match step {
                Step::Call { tool, args, .. } => (Some(tool), Some(args), false, false),
                Step::Map { tool, args, over, .. } => {
                    match over {
                        Source::Var(v) if !bound.contains(v) => return err(format!("'{v}' used before binding")),
                        Source::YearRange(a, b) if !slot_ok(a) || !slot_ok(b) => {
                            return err(format!("undeclared year slots {a}/{b}"))
                        }
                        _ => {}
                    }
                    (Some(tool), Some(args), true, false)
                }
                Step::Windows { tool, args, over, .. } => {
                    if !bound.contains(over) {
                        return err(format!("'{over}' used before binding"));
                    }
                    (Some(tool), Some(args), false, true)
                }
                Step::Bind { op, .. } => {
                    let refs: Vec<&str> = match op {
                        BindOp::IndicatorFromSearch { hits, property } => {
                            if !slot_ok(property) {
                                return err(format!("undeclared slot '{property}'"));
                            }
                            vec![hits]
                        }
                        BindOp::At { list, index } => vec![list, index],
                        BindOp::Exclude { list, value } => vec![list, value],
                        BindOp::Filter { list, mask } => vec![list, mask],
                        BindOp::TopKeys { sorted, list, n } => {
                            if !slot_ok(n) {
                                return err(format!("undeclared slot '{n}'"));
                            }
                            vec![sorted, list]
                        }
                    };
                    if let Some(r) = refs.iter().find(|r| !bound.contains(r)) {
                        return err(format!("'{r}' used before binding"));
                    }
                    (None, None, false, false)
                }
                Step::Guard(g) => {
                    let refs: Vec<&str> = match g {
                        Guard::UniqueExtreme { list, extreme } => vec![list, extreme],
                        Guard::DistinctBoundary { sorted, n } => {
                            if !slot_ok(n) {
                                return err(format!("undeclared slot '{n}'"));
                            }
                            vec![sorted]
                        }
                    };
                    if let Some(r) = refs.iter().find(|r| !bound.contains(r)) {
                        return err(format!("'{r}' used before binding"));
                    }
                    (None, None, false, false)
                }
            };
            if let Some(tool) = tool {
                let names = match tool {
                    ToolChoice::Fixed(t) => vec![*t],
                    ToolChoice::ByOperator { highest, lowest } => {
                        if !has_op {
                            return err("operator tool choice without operator slot".into());
                        }
                        vec![*highest, *lowest]
                    }
                };
                for name in names {
                    let Some(spec) = registry.spec(name) else {
                        return err(format!("unregistered tool '{name}'"));
                    };
                    if is_utility(name) {
                        return err(format!("utility tool '{name}' in plan"));
                    }
                    for (p, _) in args.unwrap() {
                        if !spec.params.iter().any(|q| q.name == *p) {
                            return err(format!("{name} has no parameter '{p}'"));
                        }
                    }
                }
            }
            if let Some(args) = args {
                for (_, a) in args {
                    if let Err(m) = check_arg(a, &bound, &slot_ok, in_map, in_window, has_op) {
                        return err(m);
                    }
                }
            }
            match step {
                Step::Call { bind, .. }
                | Step::Map { bind, .. }
                | Step::Windows { bind, .. }
                | Step::Bind { bind, .. } => bound.push(bind),
                Step::Guard(_) => {}
            }
        }
        let refs = match &self.answer {
            AnswerExpr::Var(v) => vec![*v],
            AnswerExpr::Differs(a, b) => vec![*a, *b],
        };
        if let Some(r) = refs.iter().find(|r| !bound.contains(r)) {
            return err(format!("answer refers to unbound '{r}'"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Entry {
    key: Value,
    value: Value,
}

#[derive(Debug, Clone)]
enum EnvVal {
    Scalar(Value),
    List(Vec<Entry>),
}

impl EnvVal {
    fn to_value(&self) -> Value {
        match self {
            EnvVal::Scalar(v) => v.clone(),
            EnvVal::List(es) => Value::Array(es.iter().map(|e| e.value.clone()).collect()),
        }
    }
}

/// Early exits of the interpreter.
enum Stop {
    Unanswerable(String),
    Error(PlanError),
}

impl From<PlanError> for Stop {
    fn from(e: PlanError) -> Self {
        Stop::Error(e)
    }
}

fn authoring(m: impl Into<String>) -> Stop {
    Stop::Error(PlanError::Authoring(m.into()))
}

fn degenerate(m: impl Into<String>) -> Stop {
    Stop::Error(PlanError::Degenerate(m.into()))
}

struct Exec<'a> {
    ctx: &'a DataContext,
    registry: Registry,
    slots: &'a Slots,
    op: Option<Op>,
    env: HashMap<&'static str, EnvVal>,
    essential: Vec<EssentialAction>,
    dropped: usize,
}

impl<'a> Exec<'a> {
    fn var(&self, name: &str) -> Result<&EnvVal, Stop> {
        self.env.get(name).ok_or_else(|| authoring(format!("unbound variable '{name}'")))
    }

    fn list(&self, name: &str) -> Result<&Vec<Entry>, Stop> {
        match self.var(name)? {
            EnvVal::List(es) => Ok(es),
            EnvVal::Scalar(Value::Array(_)) => Err(authoring(format!("'{name}' is an array, not a keyed list"))),
            EnvVal::Scalar(_) => Err(authoring(format!("'{name}' is not a list"))),
        }
    }

    fn scalar(&self, name: &str) -> Result<&Value, Stop> {
        match self.var(name)? {
            EnvVal::Scalar(v) => Ok(v),
            EnvVal::List(_) => Err(authoring(format!("'{name}' is a list"))),
        }
    }

    fn slot(&self, name: &str) -> Result<&SlotValue, Stop> {
        self.slots.get(name).ok_or_else(|| authoring(format!("slot '{name}' has no value")))
    }

    fn operator(&self) -> Result<Op, Stop> {
        self.op.ok_or_else(|| authoring("plan needs an operator slot"))
    }

    fn count_slot(&self, name: &str) -> Result<usize, Stop> {
        match self.slot(name)? {
            SlotValue::Count { value } => Ok(*value),
            other => Err(authoring(format!("slot '{name}' is not a count: {other:?}"))),
        }
    }

    fn tool(&self, choice: ToolChoice) -> Result<&'static str, Stop> {
        Ok(match choice {
            ToolChoice::Fixed(t) => t,
            ToolChoice::ByOperator { highest, lowest } => match self.operator()? {
                Op::Highest => highest,
                Op::Lowest => lowest,
            },
        })
    }

    fn arg(&self, a: &Arg, item: Option<&Entry>, prev: Option<&Entry>) -> Result<Value, Stop> {
        Ok(match a {
            Arg::Slot(s) => match self.slot(s)? {
                SlotValue::Country { name, .. } | SlotValue::Region { name } => Value::from(name.as_str()),
                SlotValue::Property { name, .. } => Value::from(name.as_str()),
                SlotValue::Year { value } => Value::from(*value),
                SlotValue::Count { value } => Value::from(*value),
                SlotValue::Threshold { value } => number(*value),
                SlotValue::Operator { .. } => return Err(authoring("operator slot used as an argument")),
            },
            Arg::Var(v) => self.var(v)?.to_value(),
            Arg::Lit(x) => number(*x),
            Arg::Item => item.ok_or_else(|| authoring("Item out of scope"))?.value.clone(),
            Arg::Prev => prev.ok_or_else(|| authoring("Prev out of scope"))?.value.clone(),
            Arg::Zip(v) => {
                let key = &item.ok_or_else(|| authoring("Zip out of scope"))?.key;
                self.list(v)?
                    .iter()
                    .find(|e| &e.key == key)
                    .map(|e| e.value.clone())
                    .ok_or_else(|| Stop::Unanswerable(format!("no entry for {key} in '{v}'")))?
            }
            Arg::Keywords(s) => match self.slot(s)? {
                SlotValue::Property { surface, .. } => {
                    Value::Array(tokens(surface).into_iter().map(Value::from).collect())
                }
                other => return Err(authoring(format!("Keywords on non-property slot {other:?}"))),
            },
            Arg::ByOperator { highest, lowest } => match self.operator()? {
                Op::Highest => self.arg(highest, item, prev)?,
                Op::Lowest => self.arg(lowest, item, prev)?,
            },
        })
    }

    fn args(
        &self,
        args: &[(&'static str, Arg)],
        item: Option<&Entry>,
        prev: Option<&Entry>,
    ) -> Result<Value, Stop> {
        let mut m = Map::new();
        for (name, a) in args {
            m.insert((*name).to_string(), self.arg(a, item, prev)?);
        }
        Ok(Value::Object(m))
    }

    /// Runs one call. `Ok(None)` means the datum was missing and dropped.
    fn call(&mut self, tool: &'static str, args: Value, on_missing: OnMissing) -> Result<Option<Value>, Stop> {
        let outcome = self.registry.execute_named(tool, &args, self.ctx);
        let err = match outcome.error() {
            None => {
                self.record(tool, args);
                return Ok(outcome.payload().cloned());
            }
            Some(e) => e.clone(),
        };
        match (err.kind, on_missing) {
            (ErrorKind::NoData, OnMissing::Drop) => {
                self.dropped += 1;
                Ok(None)
            }
            (ErrorKind::NoData, OnMissing::Fail) => Err(Stop::Unanswerable(err.message)),
            // an aggregate left empty (or unbalanced) by earlier drops
            _ if self.dropped > 0 => Err(Stop::Unanswerable(format!("after dropped data: {}", err.message))),
            (ErrorKind::ArithmeticError, _) => Err(degenerate(err.message)),
            _ => Err(authoring(format!("{tool}({args}): {}", err.message))),
        }
    }

    fn record(&mut self, tool: &'static str, args: Value) {
        if is_utility(tool) {
            return;
        }
        let duplicate = self
            .essential
            .iter()
            .any(|a| a.tool == tool && semantic_eq(&a.args, &args, true));
        if duplicate {
            return;
        }
        let (matcher, expect) = if tool == SEARCH {
            let expect = self
                .slots
                .values()
                .find_map(|s| match s {
                    SlotValue::Property { code, .. } => self.ctx.indicator(code),
                    _ => None,
                })
                .map(|ind| ind.all_names().map(str::to_string).collect())
                .unwrap_or_default();
            (MatchKind::Predicate, expect)
        } else if args
            .as_object()
            .is_some_and(|m| m.values().any(Value::is_array))
        {
            (MatchKind::Multiset, Vec::new())
        } else {
            (MatchKind::Exact, Vec::new())
        };
        self.essential.push(EssentialAction {
            tool: tool.to_string(),
            args,
            matcher,
            expect,
        });
    }

    fn source(&self, over: Source) -> Result<Vec<Entry>, Stop> {
        match over {
            Source::Var(v) => self.list(v).cloned(),
            Source::YearRange(a, b) => {
                let year = |s| match self.slot(s)? {
                    SlotValue::Year { value } => Ok(*value),
                    other => Err(authoring(format!("slot '{s}' is not a year: {other:?}"))),
                };
                Ok((year(a)?..=year(b)?)
                    .map(|y| Entry {
                        key: Value::from(y),
                        value: Value::from(y),
                    })
                    .collect())
            }
        }
    }

    fn step(&mut self, step: &Step) -> Result<(), Stop> {
        match step {
            Step::Call { bind, tool, args } => {
                let tool = self.tool(*tool)?;
                let args = self.args(args, None, None)?;
                let v = self.call(tool, args, OnMissing::Fail)?.expect("Fail never drops");
                let v = match v {
                    Value::Array(items) => EnvVal::List(
                        items
                            .into_iter()
                            .map(|x| Entry {
                                key: x.clone(),
                                value: x,
                            })
                            .collect(),
                    ),
                    other => EnvVal::Scalar(other),
                };
                self.env.insert(bind, v);
            }
            Step::Map {
                bind,
                over,
                tool,
                args,
                on_missing,
            } => {
                let tool = self.tool(*tool)?;
                let mut out = Vec::new();
                for entry in self.source(*over)? {
                    let a = self.args(args, Some(&entry), None)?;
                    if let Some(v) = self.call(tool, a, *on_missing)? {
                        out.push(Entry {
                            key: entry.key,
                            value: v,
                        });
                    }
                }
                self.env.insert(bind, EnvVal::List(out));
            }
            Step::Windows { bind, over, tool, args } => {
                let tool = self.tool(*tool)?;
                let entries = self.list(over)?.clone();
                let mut out = Vec::new();
                for w in entries.windows(2) {
                    let a = self.args(args, Some(&w[1]), Some(&w[0]))?;
                    let v = self.call(tool, a, OnMissing::Fail)?.expect("Fail never drops");
                    out.push(Entry {
                        key: w[1].key.clone(),
                        value: v,
                    });
                }
                self.env.insert(bind, EnvVal::List(out));
            }
            Step::Bind { bind, op } => {
                let v = self.bind(op)?;
                self.env.insert(bind, v);
            }
            Step::Guard(g) => self.guard(g)?,
        }
        Ok(())
    }

    fn bind(&self, op: &BindOp) -> Result<EnvVal, Stop> {
        Ok(match op {
            BindOp::IndicatorFromSearch { hits, property } => {
                let name = match self.slot(property)? {
                    SlotValue::Property { name, .. } => name.clone(),
                    other => return Err(authoring(format!("'{property}' is not a property: {other:?}"))),
                };
                let found = self.list(hits)?.iter().any(|e| {
                    e.value
                        .get("name")
                        .and_then(Value::as_str)
                        .is_some_and(|n| fold(n) == fold(&name))
                });
                if !found {
                    return Err(degenerate(format!("search did not return '{name}'")));
                }
                EnvVal::Scalar(Value::from(name))
            }
            BindOp::At { list, index } => {
                let i = self
                    .scalar(index)?
                    .as_u64()
                    .ok_or_else(|| authoring(format!("'{index}' is not an index")))?;
                let e = self
                    .list(list)?
                    .get(i as usize)
                    .ok_or_else(|| authoring(format!("index {i} out of range for '{list}'")))?;
                EnvVal::Scalar(e.key.clone())
            }
            BindOp::Exclude { list, value } => {
                let v = self.scalar(value)?;
                EnvVal::List(
                    self.list(list)?
                        .iter()
                        .filter(|e| !semantic_eq(&e.value, v, false))
                        .cloned()
                        .collect(),
                )
            }
            BindOp::Filter { list, mask } => {
                let mask = self.list(mask)?;
                EnvVal::List(
                    self.list(list)?
                        .iter()
                        .filter(|e| {
                            mask.iter()
                                .any(|m| m.key == e.key && m.value == Value::Bool(true))
                        })
                        .cloned()
                        .collect(),
                )
            }
            BindOp::TopKeys { sorted, list, n } => {
                let n = self.count_slot(n)?;
                let sorted = numbers(self.var(sorted)?.to_value())?;
                if n > sorted.len() {
                    return Err(degenerate(format!("{n} requested from {} values", sorted.len())));
                }
                // descending value order for both operators
                let picked: Vec<f64> = match self.operator()? {
                    Op::Highest => sorted.iter().rev().take(n).copied().collect(),
                    Op::Lowest => sorted.iter().take(n).rev().copied().collect(),
                };
                let entries = self.list(list)?;
                let mut used = vec![false; entries.len()];
                let mut out = Vec::new();
                for x in picked {
                    let j = (0..entries.len())
                        .find(|&j| !used[j] && entries[j].value.as_f64() == Some(x))
                        .ok_or_else(|| authoring(format!("sorted value {x} not in '{list}'")))?;
                    used[j] = true;
                    out.push(Entry {
                        key: entries[j].key.clone(),
                        value: entries[j].key.clone(),
                    });
                }
                EnvVal::List(out)
            }
        })
    }

    fn guard(&self, g: &Guard) -> Result<(), Stop> {
        match g {
            Guard::UniqueExtreme { list, extreme } => {
                let x = self.scalar(extreme)?.as_f64();
                let hits = self.list(list)?.iter().filter(|e| e.value.as_f64() == x).count();
                if hits != 1 {
                    return Err(degenerate(format!("{hits} entries of '{list}' share the extreme value")));
                }
            }
            Guard::DistinctBoundary { sorted, n } => {
                let n = self.count_slot(n)?;
                let s = numbers(self.var(sorted)?.to_value())?;
                if n >= s.len() {
                    return Err(degenerate(format!("{n} requested from {} values", s.len())));
                }
                let (inside, outside) = match self.operator()? {
                    Op::Highest => (s[s.len() - n], s[s.len() - n - 1]),
                    Op::Lowest => (s[n - 1], s[n]),
                };
                if inside == outside {
                    return Err(degenerate(format!("tie at the top-{n} boundary")));
                }
            }
        }
        Ok(())
    }
}

fn numbers(v: Value) -> Result<Vec<f64>, Stop> {
    match v {
        Value::Array(items) => items
            .iter()
            .map(|x| x.as_f64().ok_or_else(|| authoring(format!("non-number {x} in list"))))
            .collect(),
        other => Err(authoring(format!("expected a list of numbers, got {other}"))),
    }
}

/// Runs `plan` on `slots`. Deterministic for fixed inputs.
pub fn execute_plan(plan: &SolutionPlan, slots: &Slots, ctx: &DataContext) -> Result<PlanOutcome, PlanError> {
    let op = slots.get("operator").and_then(|s| match s {
        SlotValue::Operator { value } => Some(*value),
        _ => None,
    });
    let mut ex = Exec {
        ctx,
        registry: Registry::new(ToolMode::All),
        slots,
        op,
        env: HashMap::new(),
        essential: Vec::new(),
        dropped: 0,
    };
    for step in &plan.steps {
        match ex.step(step) {
            Ok(()) => {}
            Err(Stop::Unanswerable(missing)) => return Ok(PlanOutcome::Unanswerable { missing }),
            Err(Stop::Error(e)) => return Err(e),
        }
    }
    if ex.dropped > 0 {
        return Ok(PlanOutcome::Partial { dropped: ex.dropped });
    }
    let answer = match &plan.answer {
        AnswerExpr::Var(v) => ex.var(v).map(EnvVal::to_value),
        AnswerExpr::Differs(a, b) => ex
            .scalar(a)
            .and_then(|x| Ok(Value::Bool(!semantic_eq(x, ex.scalar(b)?, false)))),
    };
    match answer {
        Ok(answer) => Ok(PlanOutcome::Answered {
            answer,
            essential: ex.essential,
        }),
        Err(Stop::Error(e)) => Err(e),
        Err(Stop::Unanswerable(m)) => Ok(PlanOutcome::Unanswerable { missing: m }),
    }
}
