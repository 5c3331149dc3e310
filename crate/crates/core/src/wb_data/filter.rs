use super::IndicatorMeta;

/// True when the name carries a parenthesised unit that starts with `%`,
/// e.g. `(% of land area)` or `(% gross)`.
pub fn is_normalized_name(name: &str) -> bool {
    name.match_indices('(')
        .any(|(i, _)| name[i + 1..].trim_start().starts_with('%'))
}

/// Drops indicators that report normalised values. Order is preserved.
pub fn filter_indicators(catalogue: Vec<IndicatorMeta>) -> Vec<IndicatorMeta> {
    catalogue
        .into_iter()
        .filter(|ind| !is_normalized_name(&ind.name))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn meta(name: &str) -> IndicatorMeta {
        IndicatorMeta::new("X.Y", name, "").unwrap()
    }

    fn names(v: &[IndicatorMeta]) -> Vec<&str> {
        v.iter().map(|m| m.name.as_str()).collect()
    }

    #[test]
    fn drops_percent_of_land_area() {
        assert!(filter_indicators(vec![meta("Agricultural land (% of land area)")]).is_empty());
    }

    #[test]
    fn empty_catalogue() {
        assert!(filter_indicators(vec![]).is_empty());
    }

    #[test]
    fn keeps_absolute_units() {
        let out = filter_indicators(vec![
            meta("Rail lines (total route-km)"),
            meta("School enrolment, secondary (% gross)"),
        ]);
        assert_eq!(names(&out), vec!["Rail lines (total route-km)"]);
    }

    #[test]
    fn growth_rates_are_not_normalized_units() {
        assert!(!is_normalized_name("GDP growth (annual %)"));
        assert!(is_normalized_name("Access to electricity ( % of population)"));
    }

    proptest! {
        #[test]
        fn filtering_is_idempotent(raw in proptest::collection::vec("[a-z (%)]{0,20}", 0..12)) {
            let cat: Vec<IndicatorMeta> = raw.iter().map(|n| meta(n)).collect();
            let once = filter_indicators(cat);
            let twice = filter_indicators(once.clone());
            prop_assert_eq!(once, twice);
        }
    }
}
