//! Direct computation of gold answers from the value tables, without the
//! tool registry. Used to cross-check the plans.

use serde_json::Value;

use crate::templates::{Op, SlotValue, Slots, TemplateId};
use crate::value::number;
use crate::wb_data::{CountryCode, DataContext};

struct Q<'a> {
    ctx: &'a DataContext,
    slots: &'a Slots,
}

impl Q<'_> {
    fn get(&self, name: &str) -> Result<&SlotValue, String> {
        self.slots.get(name).ok_or_else(|| format!("missing slot '{name}'"))
    }

    fn country(&self, name: &str) -> Result<CountryCode, String> {
        match self.get(name)? {
            SlotValue::Country { code, .. } => CountryCode::parse(code).map_err(|e| e.to_string()),
            other => Err(format!("{name} is {other:?}")),
        }
    }

    fn year(&self, name: &str) -> Result<i32, String> {
        match self.get(name)? {
            SlotValue::Year { value } => Ok(*value),
            other => Err(format!("{name} is {other:?}")),
        }
    }

    fn op(&self) -> Result<Op, String> {
        match self.get("operator")? {
            SlotValue::Operator { value } => Ok(*value),
            other => Err(format!("operator is {other:?}")),
        }
    }

    fn members(&self, name: &str) -> Result<Vec<CountryCode>, String> {
        let region = match self.get(name)? {
            SlotValue::Region { name } => name,
            other => return Err(format!("{name} is {other:?}")),
        };
        let r = self.ctx.regions().get(region).ok_or_else(|| format!("unknown region {region}"))?;
        Ok(r.members.iter().cloned().collect())
    }

    fn value(&self, country: &CountryCode, year: i32) -> Result<f64, String> {
        let code = match self.get("property")? {
            SlotValue::Property { code, .. } => code,
            other => return Err(format!("property is {other:?}")),
        };
        let ind = self.ctx.indicator(code).ok_or_else(|| format!("unknown indicator {code}"))?;
        self.ctx
            .table(&ind.code)
            .and_then(|t| t.get(country, year))
            .ok_or_else(|| format!("no value for {country} {code} {year}"))
    }

    fn values(&self, region: &str, year: i32) -> Result<Vec<(CountryCode, f64)>, String> {
        self.members(region)?
            .into_iter()
            .map(|c| self.value(&c, year).map(|v| (c, v)))
            .collect()
    }

    fn name(&self, c: &CountryCode) -> Result<String, String> {
        self.ctx.country(c).map(|m| m.name.clone()).ok_or_else(|| format!("unknown country {c}"))
    }

    /// `a > b` for highest, `b > a` for lowest.
    fn beats(&self, a: f64, b: f64) -> Result<bool, String> {
        Ok(match self.op()? {
            Op::Highest => a > b,
            Op::Lowest => b > a,
        })
    }

    fn extreme(&self, vals: &[(CountryCode, f64)]) -> Result<CountryCode, String> {
        let op = self.op()?;
        let best = vals
            .iter()
            .map(|(_, v)| *v)
            .reduce(|a, b| if op == Op::Highest { a.max(b) } else { a.min(b) })
            .ok_or("empty region")?;
        let mut at = vals.iter().filter(|(_, v)| *v == best);
        let first = at.next().ok_or("no extreme")?;
        if at.next().is_some() {
            return Err("tied extreme".into());
        }
        Ok(first.0.clone())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn rank(xs: &[f64], q: f64) -> usize {
    1 + xs.iter().filter(|&&x| x > q).count()
}

fn only_values(vals: &[(CountryCode, f64)]) -> Vec<f64> {
    vals.iter().map(|(_, v)| *v).collect()
}

fn range(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// The gold answer of an answerable instance, computed directly.
pub fn brute_force_answer(id: TemplateId, slots: &Slots, ctx: &DataContext) -> Result<Value, String> {
    use TemplateId as T;
    let q = Q { ctx, slots };
    Ok(match id {
        T::AverageChange => {
            let s = q.country("subject")?;
            let (a, b) = (q.year("year_a")?, q.year("year_b")?);
            // consecutive changes telescope
            number((q.value(&s, b)? - q.value(&s, a)?) / f64::from(b - a))
        }
        T::AverageProperty => number(mean(&only_values(&q.values("region", q.year("year")?)?))),
        T::AveragePropertyComparison => {
            let y = q.year("year")?;
            let v = q.value(&q.country("subject")?, y)?;
            Value::Bool(q.beats(v, mean(&only_values(&q.values("region", y)?)))?)
        }
        T::CountryPropertyComparison => {
            let a = q.value(&q.country("subject_a")?, q.year("year_a")?)?;
            let b = q.value(&q.country("subject_b")?, q.year("year_b")?)?;
            Value::Bool(q.beats(a, b)?)
        }
        T::CountryThresholdCount => {
            let y = q.year("year")?;
            let s = q.country("subject")?;
            let sv = q.value(&s, y)?;
            let mut n = 0;
            for (c, v) in q.values("region", y)? {
                if c != s && q.beats(v, sv)? {
                    n += 1;
                }
            }
            Value::from(n)
        }
        T::PropertyOfSubject => number(q.value(&q.country("subject")?, q.year("year")?)?),
        T::PropertyRatioComparison => {
            let y = q.year("year")?;
            let a = q.value(&q.country("subject_a")?, y)?;
            let b = q.value(&q.country("subject_b")?, y)?;
            let t = match q.get("threshold")? {
                SlotValue::Threshold { value } => *value,
                other => return Err(format!("threshold is {other:?}")),
            };
            Value::Bool(q.beats(a / b, t)?)
        }
        T::RankChange => {
            let s = q.country("subject")?;
            let (ya, yb) = (q.year("year_a")?, q.year("year_b")?);
            let ra = rank(&only_values(&q.values("region", ya)?), q.value(&s, ya)?);
            let rb = rank(&only_values(&q.values("region", yb)?), q.value(&s, yb)?);
            Value::Bool(ra != rb)
        }
        T::RegionAverageComparison => {
            let y = q.year("year")?;
            let a = mean(&only_values(&q.values("region_a", y)?));
            let b = mean(&only_values(&q.values("region_b", y)?));
            Value::Bool(q.beats(a, b)?)
        }
        T::RegionComparison => {
            let winner = q.extreme(&q.values("region", q.year("year")?)?)?;
            Value::from(q.name(&winner)?)
        }
        T::RegionComparisonResult => {
            let winner = q.extreme(&q.values("region", q.year("year_2")?)?)?;
            number(q.value(&winner, q.year("year_1")?)?)
        }
        T::RegionPropertyChange => {
            let (ya, yb) = (q.year("year_a")?, q.year("year_b")?);
            let changes = q
                .members("region")?
                .into_iter()
                .map(|c| Ok((c.clone(), q.value(&c, yb)? - q.value(&c, ya)?)))
                .collect::<Result<Vec<_>, String>>()?;
            Value::from(q.name(&q.extreme(&changes)?)?)
        }
        T::RegionPropertyRatio => {
            let xs = only_values(&q.values("region", q.year("year")?)?);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            number(hi / lo)
        }
        T::RegionProportion => {
            let y = q.year("year")?;
            let total: f64 = only_values(&q.values("region", y)?).iter().sum();
            number(q.value(&q.country("subject")?, y)? / total)
        }
        T::RegionProportionChange => {
            let s = q.country("subject")?;
            let share = |y: i32| -> Result<f64, String> {
                let total: f64 = only_values(&q.values("region", y)?).iter().sum();
                Ok(q.value(&s, y)? / total)
            };
            Value::Bool(q.beats(share(q.year("year_a")?)?, share(q.year("year_b")?)?)?)
        }
        T::RegionRangeComparison => {
            let y = q.year("year")?;
            let a = range(&only_values(&q.values("region_a", y)?));
            let b = range(&only_values(&q.values("region_b", y)?));
            Value::Bool(q.beats(a, b)?)
        }
        T::SubjectPropertyChange => {
            let s = q.country("subject")?;
            let change = q.value(&s, q.year("year_b")?)? - q.value(&s, q.year("year_a")?)?;
            Value::Bool(q.beats(change, 0.0)?)
        }
        T::SubjectPropertyRank => {
            let y = q.year("year")?;
            let xs = only_values(&q.values("region", y)?);
            Value::from(rank(&xs, q.value(&q.country("subject")?, y)?))
        }
        T::TopNTotal => {
            let n = match q.get("n")? {
                SlotValue::Count { value } => *value,
                other => return Err(format!("n is {other:?}")),
            };
            let mut vals = q.values("region", q.year("year")?)?;
            vals.sort_by(|a, b| b.1.total_cmp(&a.1));
            let picked: Vec<_> = match q.op()? {
                Op::Highest => vals[..n].to_vec(),
                Op::Lowest => vals[vals.len() - n..].to_vec(),
            };
            Value::Array(
                picked
                    .iter()
                    .map(|(c, _)| q.name(c).map(Value::from))
                    .collect::<Result<_, _>>()?,
            )
        }
        T::TotalProperty => number(only_values(&q.values("region", q.year("year")?)?).iter().sum()),
    })
}
