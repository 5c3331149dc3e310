//! The seven data-retrieval tools over a [`DataContext`].

use serde::{Deserialize, Serialize};

use super::{ErrorKind, ToolError};
use crate::value::{fold, tokens};
use crate::wb_data::{CountryCode, DataContext, DataError};

/// One search result as returned to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub name: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternative_names: Vec<String>,
}

/// Ranks catalogue entries by the number of distinct keyword tokens found in
/// the entry's name, description and paraphrases. Zero-score entries are
/// dropped; ties keep catalogue order.
pub fn search_for_indicator_names(
    ctx: &DataContext,
    keywords: &[String],
    limit: usize,
) -> Result<Vec<Hit>, ToolError> {
    let mut wanted: Vec<String> = Vec::new();
    for k in keywords {
        for t in tokens(k) {
            if !wanted.contains(&t) {
                wanted.push(t);
            }
        }
    }
    if wanted.is_empty() {
        return Err(ToolError::bad_args(format!(
            "'keywords' must contain at least one word, got {keywords:?}"
        )));
    }
    let mut scored: Vec<(usize, usize)> = ctx
        .catalogue()
        .iter()
        .enumerate()
        .filter_map(|(i, ind)| {
            let mut text = format!("{} {}", ind.name, ind.description);
            for p in &ind.paraphrases {
                text.push(' ');
                text.push_str(p);
            }
            let have = tokens(&text);
            let score = wanted.iter().filter(|w| have.contains(w)).count();
            (score > 0).then_some((score, i))
        })
        .collect();
    // stable sort keeps catalogue order among equal scores
    scored.sort_by(|a, b| b.0.cmp(&a.0));
    Ok(scored
        .into_iter()
        .take(limit)
        .map(|(_, i)| {
            let ind = &ctx.catalogue()[i];
            Hit {
                name: ind.name.clone(),
                description: ind.description.clone(),
                alternative_names: ind.paraphrases.clone(),
            }
        })
        .collect())
}

/// Up to three candidates closest to `query` by normalized edit distance or
/// substring containment.
fn suggestions<'a>(query: &str, candidates: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let q = fold(query);
    let mut scored: Vec<(f64, &str)> = candidates
        .map(|c| {
            let f = fold(c);
            let mut s = strsim::normalized_levenshtein(&q, &f);
            if !q.is_empty() && (f.contains(&q) || q.contains(&f)) {
                s = s.max(0.75);
            }
            (s, c)
        })
        .filter(|(s, _)| *s >= 0.5)
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.into_iter().take(3).map(|(_, c)| c).collect()
}

fn with_suggestions(detail: String, found: Vec<&str>) -> ToolError {
    if found.is_empty() {
        ToolError::not_found(detail)
    } else {
        ToolError::not_found(format!("{detail}; did you mean: {}?", found.join(", ")))
    }
}

pub fn get_country_code_from_name(ctx: &DataContext, name: &str) -> Result<String, ToolError> {
    match ctx.country_by_name(name) {
        Some(c) => Ok(c.code.to_string()),
        None => Err(with_suggestions(
            format!("no country named '{name}'"),
            suggestions(name, ctx.countries().iter().map(|c| c.name.as_str())),
        )),
    }
}

fn known_country<'a>(ctx: &'a DataContext, code: &str) -> Result<&'a crate::wb_data::CountryMeta, ToolError> {
    CountryCode::parse(code)
        .ok()
        .and_then(|c| ctx.country(&c))
        .ok_or_else(|| ToolError::not_found(format!("no country with code '{code}'")))
}

pub fn get_country_name_from_code(ctx: &DataContext, code: &str) -> Result<String, ToolError> {
    Ok(known_country(ctx, code)?.name.clone())
}

pub fn get_indicator_code_from_name(ctx: &DataContext, name: &str) -> Result<String, ToolError> {
    match ctx.indicator_by_name(name) {
        Some(ind) => Ok(ind.code.to_string()),
        None => Err(ToolError::not_found(format!(
            "no indicator named '{name}'; use search_for_indicator_names to find valid names"
        ))),
    }
}

pub fn get_indicator_name_from_code(ctx: &DataContext, code: &str) -> Result<String, ToolError> {
    match ctx.indicator(code) {
        Some(ind) => Ok(ind.name.clone()),
        None => Err(ToolError::not_found(format!("no indicator with code '{code}'"))),
    }
}

/// Member codes in ascending order.
pub fn get_country_codes_in_region(ctx: &DataContext, region: &str) -> Result<Vec<String>, ToolError> {
    match ctx.regions().get(region) {
        Some(r) => Ok(r.members.iter().map(|c| c.to_string()).collect()),
        None => Err(with_suggestions(
            format!("no region named '{region}'"),
            suggestions(region, ctx.regions().iter().map(|r| r.name.as_str())),
        )),
    }
}

pub fn retrieve_value(
    ctx: &DataContext,
    country_code: &str,
    indicator_code: &str,
    year: i32,
) -> Result<f64, ToolError> {
    match ctx.lookup_value(country_code, indicator_code, year) {
        Ok(Some(v)) => Ok(v),
        Ok(None) => Err(ToolError::new(
            ErrorKind::NoData,
            format!("no value for country_code={country_code}, indicator_code={indicator_code}, year={year}"),
        )),
        Err(DataError::UnknownCountry(c)) => Err(ToolError::not_found(format!(
            "no country with code '{c}'; use get_country_code_from_name"
        ))),
        Err(DataError::UnknownIndicator(i)) => Err(ToolError::not_found(format!(
            "no indicator with code '{i}'; use get_indicator_code_from_name"
        ))),
        Err(e) => Err(ToolError::not_found(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::tiny_context;

    fn names(hits: &[Hit]) -> Vec<&str> {
        hits.iter()
            .flat_map(|h| std::iter::once(h.name.as_str()).chain(h.alternative_names.iter().map(String::as_str)))
            .collect()
    }

    #[test]
    fn search_finds_paraphrases() {
        let ctx = tiny_context();
        let kw: Vec<String> = ["secondary", "school", "enrolment"].map(String::from).to_vec();
        let hits = search_for_indicator_names(&ctx, &kw, 10).unwrap();
        assert!(names(&hits).contains(&"Secondary school enrolment rate"));
        assert_eq!(hits[0].name, "School enrolment, secondary (% gross)");

        let hits = search_for_indicator_names(&ctx, &["railway".into()], 10).unwrap();
        assert!(names(&hits).contains(&"railway route length"));
        assert!(search_for_indicator_names(&ctx, &["zzzz".into()], 10).unwrap().is_empty());
    }

    #[test]
    fn empty_keywords_are_rejected() {
        let ctx = tiny_context();
        assert_eq!(
            search_for_indicator_names(&ctx, &[], 10).unwrap_err().kind,
            ErrorKind::BadArguments
        );
        assert!(search_for_indicator_names(&ctx, &[" , ".into()], 10).is_err());
    }

    #[test]
    fn search_respects_limit_and_score_order() {
        let ctx = tiny_context();
        let hits = search_for_indicator_names(&ctx, &["land rail lines".into()], 1).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].name, "Rail lines (total route-km)");
    }

    #[test]
    fn country_lookups() {
        let ctx = tiny_context();
        assert_eq!(get_country_code_from_name(&ctx, "Ghana").unwrap(), "GHA");
        assert_eq!(get_country_code_from_name(&ctx, "ghana").unwrap(), "GHA");
        let e = get_country_code_from_name(&ctx, "Ghanna").unwrap_err();
        assert!(e.message.contains("Ghana"), "{}", e.message);
        assert!(get_country_code_from_name(&ctx, "Atlantis").is_err());
        assert_eq!(get_country_name_from_code(&ctx, "GHA").unwrap(), "Ghana");
        assert!(get_country_name_from_code(&ctx, "ZZZ").is_err());
        for c in ctx.countries() {
            let code = get_country_code_from_name(&ctx, &c.name).unwrap();
            assert_eq!(get_country_name_from_code(&ctx, &code).unwrap(), c.name);
        }
    }

    #[test]
    fn indicator_lookups() {
        let ctx = tiny_context();
        let raw = "Permanent cropland (% of land area)";
        assert_eq!(get_indicator_code_from_name(&ctx, raw).unwrap(), "AG.LND.CROP.ZS");
        assert_eq!(get_indicator_name_from_code(&ctx, "AG.LND.CROP.ZS").unwrap(), raw);
        assert_eq!(
            get_indicator_code_from_name(&ctx, "Railway route length").unwrap(),
            get_indicator_code_from_name(&ctx, "Rail lines (total route-km)").unwrap()
        );
        assert!(get_indicator_code_from_name(&ctx, "Bogus indicator").is_err());
        assert!(get_indicator_name_from_code(&ctx, "NOPE").is_err());
    }

    #[test]
    fn region_lookups() {
        let ctx = tiny_context();
        assert_eq!(
            get_country_codes_in_region(&ctx, "Western Africa").unwrap(),
            vec!["GHA", "NGA", "SEN"]
        );
        let we = get_country_codes_in_region(&ctx, "Western Europe").unwrap();
        let eu = get_country_codes_in_region(&ctx, "Europe").unwrap();
        assert!(we.iter().all(|c| eu.contains(c)));
        assert_eq!(
            get_country_codes_in_region(&ctx, "Narnia").unwrap_err().kind,
            ErrorKind::NotFound
        );
    }

    #[test]
    fn retrieve_distinguishes_missing_and_unknown() {
        let ctx = tiny_context();
        assert_eq!(retrieve_value(&ctx, "GHA", "AG.LND.CROP.ZS", 2005).unwrap(), 21.0);
        assert_eq!(
            retrieve_value(&ctx, "GHA", "AG.LND.CROP.ZS", 1990).unwrap_err().kind,
            ErrorKind::NoData
        );
        assert_eq!(
            retrieve_value(&ctx, "GHA", "MADE.UP", 2005).unwrap_err().kind,
            ErrorKind::NotFound
        );
        assert_eq!(
            retrieve_value(&ctx, "XXX", "AG.LND.CROP.ZS", 2005).unwrap_err().kind,
            ErrorKind::NotFound
        );
    }
}
