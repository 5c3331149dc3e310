//! Built-in data contexts for tests, benches and offline runs.
//!
//! [`tiny_context`] is hand-authored: five countries, three indicators and
//! four years, every value present and distinct within each year.
//! [`synthetic_context`] is a larger seeded context with real country codes
//! and M49 placement, World Bank style indicator metadata, and generated
//! values with a few percent missing.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::wb_data::{
    ContextParts, CountryCode, CountryMeta, DataContext, IndicatorCode, IndicatorMeta, RegionLevel,
    RegionMap, ValueTable, YearRange,
};

pub const CROPLAND: &str = "AG.LND.CROP.ZS";
pub const RAIL: &str = "IS.RRS.TOTL.KM";
pub const ENROLMENT: &str = "SE.SEC.ENRR";

const TINY_YEARS: [i32; 4] = [2005, 2006, 2007, 2008];

#[rustfmt::skip]
const TINY_VALUES: [(&str, &str, [f64; 4]); 15] = [
    (CROPLAND, "GHA", [21.0, 5.0, 11.5, 12.0]),
    (CROPLAND, "NGA", [7.25, 9.0, 7.5, 7.8]),
    (CROPLAND, "SEN", [0.5, 2.0, 0.25, 0.3]),
    (CROPLAND, "FRA", [1.8, 1.85, 1.9, 1.95]),
    (CROPLAND, "DEU", [0.55, 0.6, 0.57, 0.58]),
    (RAIL, "GHA", [4.5, 5.0, 6.0, 6.5]),
    (RAIL, "NGA", [8.0, 9.0, 9.5, 10.0]),
    (RAIL, "SEN", [1.5, 2.0, 2.5, 3.0]),
    (RAIL, "FRA", [29.0, 29.5, 30.0, 28.0]),
    (RAIL, "DEU", [33.0, 33.5, 34.0, 33.8]),
    (ENROLMENT, "GHA", [45.2, 48.1, 52.3, 55.0]),
    (ENROLMENT, "NGA", [34.5, 33.9, 36.2, 38.7]),
    (ENROLMENT, "SEN", [22.1, 24.6, 27.3, 30.2]),
    (ENROLMENT, "FRA", [110.4, 111.2, 109.8, 112.5]),
    (ENROLMENT, "DEU", [101.3, 102.5, 103.1, 100.9]),
];

fn indicator(code: &str, name: &str, description: &str, paraphrases: &[&str]) -> IndicatorMeta {
    let mut m = IndicatorMeta::new(code, name, description).expect("static indicator");
    m.paraphrases = paraphrases.iter().map(|s| s.to_string()).collect();
    m
}

fn cc(code: &str) -> CountryCode {
    CountryCode::parse(code).expect("static country code")
}

/// The hand-authored 5-country / 3-indicator / 4-year context.
pub fn tiny_context() -> DataContext {
    let catalogue = vec![
        indicator(
            RAIL,
            "Rail lines (total route-km)",
            "Rail lines are the length of railway route available for train service, irrespective of the number of parallel tracks.",
            &["railway route length", "length of rail lines", "rail network length"],
        ),
        indicator(
            ENROLMENT,
            "School enrolment, secondary (% gross)",
            "Gross enrolment ratio is the ratio of enrolment, regardless of age, to the population of the age group that officially corresponds to the level of education shown.",
            &["Secondary school enrolment rate", "secondary enrolment rate", "gross secondary school enrolment"],
        ),
        indicator(
            CROPLAND,
            "Permanent cropland (% of land area)",
            "Permanent cropland is land cultivated with crops that occupy the land for long periods and need not be replanted after each harvest.",
            &[],
        ),
    ];
    let countries: Vec<CountryMeta> = [
        ("GHA", "Ghana"),
        ("NGA", "Nigeria"),
        ("SEN", "Senegal"),
        ("FRA", "France"),
        ("DEU", "Germany"),
    ]
    .iter()
    .map(|(c, n)| CountryMeta::new(c, n).unwrap())
    .collect();

    let mut regions = RegionMap::new();
    for code in ["GHA", "NGA", "SEN"] {
        regions.insert("Africa", RegionLevel::Region, cc(code));
        regions.insert("Sub-Saharan Africa", RegionLevel::SubRegion, cc(code));
        regions.insert("Western Africa", RegionLevel::Intermediate, cc(code));
    }
    for code in ["FRA", "DEU"] {
        regions.insert("Europe", RegionLevel::Region, cc(code));
        regions.insert("Western Europe", RegionLevel::SubRegion, cc(code));
    }
    for c in &countries {
        regions.insert("World", RegionLevel::Global, c.code.clone());
    }

    let mut tables: BTreeMap<IndicatorCode, ValueTable> = BTreeMap::new();
    for (code, country, values) in TINY_VALUES {
        let code = IndicatorCode::new(code).unwrap();
        let table = tables
            .entry(code.clone())
            .or_insert_with(|| ValueTable::new(code));
        for (year, v) in TINY_YEARS.iter().zip(values) {
            table.insert(cc(country), *year, v).unwrap();
        }
    }

    DataContext::from_parts(ContextParts {
        years: YearRange::new(2005, 2008).unwrap(),
        catalogue,
        countries,
        regions,
        aliases: BTreeMap::new(),
        tables,
    })
    .expect("tiny fixture is valid")
}

// (code, name, region, sub-region, intermediate region)
#[rustfmt::skip]
const SYNTH_COUNTRIES: &[(&str, &str, &str, &str, &str)] = &[
    ("DZA", "Algeria", "Africa", "Northern Africa", ""),
    ("EGY", "Egypt, Arab Rep.", "Africa", "Northern Africa", ""),
    ("MAR", "Morocco", "Africa", "Northern Africa", ""),
    ("TUN", "Tunisia", "Africa", "Northern Africa", ""),
    ("GHA", "Ghana", "Africa", "Sub-Saharan Africa", "Western Africa"),
    ("NGA", "Nigeria", "Africa", "Sub-Saharan Africa", "Western Africa"),
    ("SEN", "Senegal", "Africa", "Sub-Saharan Africa", "Western Africa"),
    ("CIV", "Cote d'Ivoire", "Africa", "Sub-Saharan Africa", "Western Africa"),
    ("KEN", "Kenya", "Africa", "Sub-Saharan Africa", "Eastern Africa"),
    ("ETH", "Ethiopia", "Africa", "Sub-Saharan Africa", "Eastern Africa"),
    ("TZA", "Tanzania", "Africa", "Sub-Saharan Africa", "Eastern Africa"),
    ("UGA", "Uganda", "Africa", "Sub-Saharan Africa", "Eastern Africa"),
    ("ZAF", "South Africa", "Africa", "Sub-Saharan Africa", "Southern Africa"),
    ("BWA", "Botswana", "Africa", "Sub-Saharan Africa", "Southern Africa"),
    ("NAM", "Namibia", "Africa", "Sub-Saharan Africa", "Southern Africa"),
    ("BRA", "Brazil", "Americas", "Latin America and the Caribbean", "South America"),
    ("ARG", "Argentina", "Americas", "Latin America and the Caribbean", "South America"),
    ("CHL", "Chile", "Americas", "Latin America and the Caribbean", "South America"),
    ("COL", "Colombia", "Americas", "Latin America and the Caribbean", "South America"),
    ("PER", "Peru", "Americas", "Latin America and the Caribbean", "South America"),
    ("MEX", "Mexico", "Americas", "Latin America and the Caribbean", "Central America"),
    ("GTM", "Guatemala", "Americas", "Latin America and the Caribbean", "Central America"),
    ("CRI", "Costa Rica", "Americas", "Latin America and the Caribbean", "Central America"),
    ("USA", "United States", "Americas", "Northern America", ""),
    ("CAN", "Canada", "Americas", "Northern America", ""),
    ("CHN", "China", "Asia", "Eastern Asia", ""),
    ("JPN", "Japan", "Asia", "Eastern Asia", ""),
    ("KOR", "Korea, Rep.", "Asia", "Eastern Asia", ""),
    ("MNG", "Mongolia", "Asia", "Eastern Asia", ""),
    ("IND", "India", "Asia", "Southern Asia", ""),
    ("PAK", "Pakistan", "Asia", "Southern Asia", ""),
    ("BGD", "Bangladesh", "Asia", "Southern Asia", ""),
    ("NPL", "Nepal", "Asia", "Southern Asia", ""),
    ("IDN", "Indonesia", "Asia", "South-eastern Asia", ""),
    ("THA", "Thailand", "Asia", "South-eastern Asia", ""),
    ("VNM", "Viet Nam", "Asia", "South-eastern Asia", ""),
    ("PHL", "Philippines", "Asia", "South-eastern Asia", ""),
    ("FRA", "France", "Europe", "Western Europe", ""),
    ("DEU", "Germany", "Europe", "Western Europe", ""),
    ("NLD", "Netherlands", "Europe", "Western Europe", ""),
    ("BEL", "Belgium", "Europe", "Western Europe", ""),
    ("AUT", "Austria", "Europe", "Western Europe", ""),
    ("SWE", "Sweden", "Europe", "Northern Europe", ""),
    ("NOR", "Norway", "Europe", "Northern Europe", ""),
    ("FIN", "Finland", "Europe", "Northern Europe", ""),
    ("DNK", "Denmark", "Europe", "Northern Europe", ""),
    ("GBR", "United Kingdom", "Europe", "Northern Europe", ""),
    ("ITA", "Italy", "Europe", "Southern Europe", ""),
    ("ESP", "Spain", "Europe", "Southern Europe", ""),
    ("PRT", "Portugal", "Europe", "Southern Europe", ""),
    ("GRC", "Greece", "Europe", "Southern Europe", ""),
    ("POL", "Poland", "Europe", "Eastern Europe", ""),
    ("HUN", "Hungary", "Europe", "Eastern Europe", ""),
    ("ROU", "Romania", "Europe", "Eastern Europe", ""),
    ("UKR", "Ukraine", "Europe", "Eastern Europe", ""),
    ("AUS", "Australia", "Oceania", "Australia and New Zealand", ""),
    ("NZL", "New Zealand", "Oceania", "Australia and New Zealand", ""),
];

// (code, name, description, paraphrases, typical magnitude, yearly drift)
#[rustfmt::skip]
const SYNTH_INDICATORS: &[(&str, &str, &str, [&str; 3], f64, f64)] = &[
    ("SP.POP.TOTL", "Population, total",
     "Total population is based on the de facto definition of population, which counts all residents regardless of legal status or citizenship.",
     ["population", "number of people", "population size"], 3.0e7, 0.012),
    ("NY.GDP.MKTP.CD", "GDP (current US$)",
     "GDP at purchaser's prices is the sum of gross value added by all resident producers in the economy plus any product taxes and minus any subsidies.",
     ["gross domestic product", "GDP", "economic output"], 4.0e11, 0.04),
    ("EN.ATM.CO2E.KT", "CO2 emissions (kt)",
     "Carbon dioxide emissions are those stemming from the burning of fossil fuels and the manufacture of cement.",
     ["carbon dioxide emissions", "CO2 emissions", "amount of CO2 emitted"], 1.5e5, 0.01),
    ("IS.RRS.TOTL.KM", "Rail lines (total route-km)",
     "Rail lines are the length of railway route available for train service, irrespective of the number of parallel tracks.",
     ["railway route length", "length of rail lines", "rail network length"], 8.0e3, 0.002),
    ("AG.LND.FRST.K2", "Forest area (sq. km)",
     "Forest area is land under natural or planted stands of trees of at least 5 meters in situ.",
     ["forest area", "area of forest", "amount of forested land"], 1.2e5, -0.003),
    ("SP.DYN.LE00.IN", "Life expectancy at birth, total (years)",
     "Life expectancy at birth indicates the number of years a newborn infant would live if prevailing patterns of mortality at the time of its birth were to stay the same throughout its life.",
     ["life expectancy at birth", "life expectancy", "expected lifespan at birth"], 70.0, 0.003),
    ("SP.URB.TOTL", "Urban population",
     "Urban population refers to people living in urban areas as defined by national statistical offices.",
     ["urban population", "number of people living in cities", "city population"], 1.5e7, 0.02),
    ("SH.DYN.MORT", "Mortality rate, under-5 (per 1,000 live births)",
     "Under-five mortality rate is the probability per 1,000 that a newborn baby will die before reaching age five.",
     ["under-five mortality rate", "rate of child deaths before age five", "child mortality rate"], 40.0, -0.03),
    ("SP.DYN.TFRT.IN", "Fertility rate, total (births per woman)",
     "Total fertility rate represents the number of children that would be born to a woman if she were to live to the end of her childbearing years.",
     ["fertility rate", "number of births per woman", "rate of fertility"], 2.6, -0.01),
    ("NE.EXP.GNFS.CD", "Exports of goods and services (current US$)",
     "Exports of goods and services represent the value of all goods and other market services provided to the rest of the world.",
     ["exports of goods and services", "export value", "value of exports"], 1.0e11, 0.05),
    ("AG.LND.ARBL.HA", "Arable land (hectares)",
     "Arable land includes land defined by the FAO as land under temporary crops, temporary meadows and land temporarily fallow.",
     ["", "", ""], 5.0e6, -0.001),
];

/// Fraction of (country, year) cells left empty in each synthetic table.
pub const SYNTH_MISSING_RATE: f64 = 0.04;

/// Last year published for indicators whose series stop early, as recent
/// years of real data often do.
const SYNTH_LAST_YEAR: [(&str, i32); 4] = [
    ("EN.ATM.CO2E.KT", 2020),
    ("AG.LND.FRST.K2", 2021),
    ("SH.DYN.MORT", 2022),
    ("NE.EXP.GNFS.CD", 2022),
];

fn round_value(x: f64) -> f64 {
    if x.abs() >= 1000.0 {
        x.round()
    } else {
        (x * 100.0).round() / 100.0
    }
}

/// A seeded context with 57 countries, 11 indicators and the 2003-2023 range.
/// Regions cover the global, region, sub-region and intermediate tiers.
pub fn synthetic_context(seed: u64) -> DataContext {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let years = YearRange::DEFAULT;

    let countries: Vec<CountryMeta> = SYNTH_COUNTRIES
        .iter()
        .map(|(c, n, ..)| CountryMeta::new(c, n).unwrap())
        .collect();
    let mut regions = RegionMap::new();
    for (code, _, region, sub, inter) in SYNTH_COUNTRIES {
        regions.insert("World", RegionLevel::Global, cc(code));
        regions.insert(region, RegionLevel::Region, cc(code));
        regions.insert(sub, RegionLevel::SubRegion, cc(code));
        if !inter.is_empty() {
            regions.insert(inter, RegionLevel::Intermediate, cc(code));
        }
    }

    let mut catalogue = Vec::new();
    let mut tables = BTreeMap::new();
    for (code, name, description, paraphrases, scale, drift) in SYNTH_INDICATORS {
        let phrases: Vec<&str> = paraphrases.iter().copied().filter(|p| !p.is_empty()).collect();
        catalogue.push(indicator(code, name, description, &phrases));
        let code = IndicatorCode::new(*code).unwrap();
        let mut table = ValueTable::new(code.clone());
        let last_year = SYNTH_LAST_YEAR
            .iter()
            .find(|(c, _)| *c == code.as_str())
            .map_or(years.end, |(_, y)| *y);
        for c in &countries {
            // per-country level spread over two orders of magnitude for
            // extensive quantities, narrower for rates
            let spread: f64 = if *scale < 100.0 { 0.35 } else { 1.6 };
            let level = scale * (rng.random_range(-spread..spread) as f64).exp();
            let country_drift = drift + rng.random_range(-0.01..0.01);
            for (t, year) in years.iter().enumerate() {
                let noise = 1.0 + rng.random_range(-0.02..0.02);
                let v = round_value(level * (1.0 + country_drift).powi(t as i32) * noise);
                if rng.random_bool(SYNTH_MISSING_RATE) || year > last_year {
                    continue;
                }
                table.insert(c.code.clone(), year, v).unwrap();
            }
        }
        tables.insert(code, table);
    }

    DataContext::from_parts(ContextParts {
        years,
        catalogue,
        countries,
        regions,
        aliases: BTreeMap::new(),
        tables,
    })
    .expect("synthetic context is valid")
}

/// Renders the context's regions as a `;`-delimited M49-style tabulation.
/// Each country gets one row with the name of every tier it belongs to.
pub fn m49_csv(ctx: &DataContext) -> String {
    let mut out = String::from(
        "Global Code;Global Name;Region Code;Region Name;Sub-region Code;Sub-region Name;Intermediate Region Code;Intermediate Region Name;Country or Area;M49 Code;ISO-alpha2 Code;ISO-alpha3 Code\n",
    );
    for c in ctx.countries() {
        let tier = |level: RegionLevel| {
            ctx.regions()
                .iter()
                .find(|r| r.level == level && r.members.contains(&c.code))
                .map(|r| r.name.clone())
                .unwrap_or_default()
        };
        out.push_str(&format!(
            "001;{};;{};;{};;{};{};;;{}\n",
            tier(RegionLevel::Global),
            tier(RegionLevel::Region),
            tier(RegionLevel::SubRegion),
            tier(RegionLevel::Intermediate),
            c.name.replace(';', ","),
            c.code
        ));
    }
    out
}

/// A listed indicator the ingest filter must drop; it has no data.
pub const DECOY_INDICATOR: (&str, &str) = ("AG.LND.AGRI.ZS", "Agricultural land (% of land area)");

fn query_param<'a>(query: &'a str, key: &str) -> Option<&'a str> {
    query
        .split('&')
        .filter_map(|kv| kv.split_once('='))
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v)
}

fn page_of(records: Vec<serde_json::Value>, query: &str) -> serde_json::Value {
    let per_page: usize = query_param(query, "per_page").and_then(|v| v.parse().ok()).unwrap_or(50).max(1);
    let page: usize = query_param(query, "page").and_then(|v| v.parse().ok()).unwrap_or(1).max(1);
    let total = records.len();
    let pages = total.div_ceil(per_page);
    let chunk: Vec<_> = records.into_iter().skip((page - 1) * per_page).take(per_page).collect();
    let body = if chunk.is_empty() { serde_json::Value::Null } else { chunk.into() };
    serde_json::json!([{"page": page, "pages": pages, "per_page": per_page.to_string(), "total": total}, body])
}

/// What a World Bank style API would answer for `path_and_query` if its
/// data were `ctx`: status code and JSON body. Serves the indicator list
/// (plus [`DECOY_INDICATOR`]), the country list (plus one aggregate) and
/// per-indicator data with nulls for missing cells.
pub fn wb_api_response(ctx: &DataContext, path_and_query: &str) -> (u16, serde_json::Value) {
    use serde_json::{json, Value};
    let (path, query) = path_and_query.split_once('?').unwrap_or((path_and_query, ""));
    let parts: Vec<&str> = path.trim_matches('/').split('/').collect();
    let not_found = || {
        json!([{"message": [{"id": "120", "key": "Invalid value", "value": "The provided parameter value is not valid"}]}])
    };
    match parts.as_slice() {
        [.., "indicator"] if !parts.contains(&"country") => {
            let mut records: Vec<Value> = ctx
                .catalogue()
                .iter()
                .map(|i| json!({"id": i.code.as_str(), "name": i.name, "sourceNote": i.description}))
                .collect();
            records.push(json!({"id": DECOY_INDICATOR.0, "name": DECOY_INDICATOR.1, "sourceNote": ""}));
            (200, page_of(records, query))
        }
        [.., "country"] => {
            let mut records: Vec<Value> = ctx
                .countries()
                .iter()
                .map(|c| json!({"id": c.code.as_str(), "name": c.name, "region": {"id": "", "value": "Somewhere"}}))
                .collect();
            records.push(json!({"id": "WLD", "name": "World", "region": {"id": "NA", "value": "Aggregates"}}));
            (200, page_of(records, query))
        }
        [.., "country", "all", "indicator", code] => {
            let (from, to) = query_param(query, "date")
                .and_then(|d| d.split_once(':'))
                .and_then(|(a, b)| Some((a.parse::<i32>().ok()?, b.parse::<i32>().ok()?)))
                .unwrap_or((ctx.years().start, ctx.years().end));
            if *code == DECOY_INDICATOR.0 {
                return (200, page_of(Vec::new(), query));
            }
            let Some(table) = IndicatorCode::new(*code).ok().and_then(|c| ctx.table(&c)) else {
                return (200, not_found());
            };
            let mut records = Vec::new();
            for c in ctx.countries() {
                for year in (from..=to).rev() {
                    records.push(json!({
                        "indicator": {"id": code, "value": ""},
                        "country": {"id": &c.code.as_str()[..2], "value": c.name},
                        "countryiso3code": c.code.as_str(),
                        "date": year.to_string(),
                        "value": table.get(&c.code, year),
                    }));
                }
            }
            (200, page_of(records, query))
        }
        _ => (404, not_found()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wb_data::parse_region_map;

    #[test]
    fn tiny_values_are_distinct_per_year() {
        let ctx = tiny_context();
        for table in ctx.tables().values() {
            for year in TINY_YEARS {
                let mut vals: Vec<f64> = table.iter().filter(|r| r.1 == year).map(|r| r.2).collect();
                assert_eq!(vals.len(), 5);
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                assert_eq!(vals.len(), 5);
            }
        }
    }

    #[test]
    fn synthetic_is_deterministic() {
        assert_eq!(synthetic_context(3), synthetic_context(3));
        assert_ne!(synthetic_context(3), synthetic_context(4));
    }

    #[test]
    fn synthetic_shape() {
        let ctx = synthetic_context(0);
        assert_eq!(ctx.countries().len(), SYNTH_COUNTRIES.len());
        let levels = |l| ctx.regions().iter().filter(|r| r.level == l).count();
        assert_eq!(levels(RegionLevel::Region), 5);
        assert_eq!(levels(RegionLevel::SubRegion), 12);
        let cells = ctx.countries().len() * ctx.years().len();
        for t in ctx.tables().values() {
            let missing = 1.0 - t.len() as f64 / cells as f64;
            assert!(missing < 0.2, "{missing}");
        }
        let co2 = ctx.table(&IndicatorCode::new("EN.ATM.CO2E.KT").unwrap()).unwrap();
        assert!(co2.iter().all(|(_, y, _)| y <= 2020));
    }

    #[test]
    fn m49_rendering_round_trips() {
        let ctx = synthetic_context(1);
        let parsed = parse_region_map(&m49_csv(&ctx), ctx.countries()).unwrap();
        assert_eq!(&parsed, ctx.regions());
    }
}
