//! UN M49 tabulation parsing.
//!
//! The UNSD download is a delimited table (`;` in the official export, `,`
//! in many mirrors) with one row per country or area. Column names are matched
//! case-insensitively; only the name columns of each hierarchy tier and the
//! ISO-alpha3 column are read.

use std::collections::HashSet;
use std::time::Duration;

use tracing::warn;

use super::{CountryCode, CountryMeta, IngestError, RegionLevel, RegionMap};

const LEVEL_COLUMNS: [(&str, RegionLevel); 4] = [
    ("global name", RegionLevel::Global),
    ("region name", RegionLevel::Region),
    ("sub-region name", RegionLevel::SubRegion),
    ("intermediate region name", RegionLevel::Intermediate),
];
const ISO3_COLUMN: &str = "iso-alpha3 code";

/// Reads an M49 tabulation from a file path or an `http(s)://` URL.
pub fn load_region_map(source: &str, countries: &[CountryMeta]) -> Result<RegionMap, IngestError> {
    let text = if source.starts_with("http://") || source.starts_with("https://") {
        let agent = ureq::Agent::new_with_config(
            ureq::Agent::config_builder()
                .timeout_global(Some(Duration::from_secs(60)))
                .build(),
        );
        let transport = |e: ureq::Error| IngestError::Transport {
            url: source.to_string(),
            message: e.to_string(),
        };
        agent
            .get(source)
            .call()
            .map_err(transport)?
            .body_mut()
            .read_to_string()
            .map_err(transport)?
    } else {
        std::fs::read_to_string(source).map_err(|e| IngestError::Io {
            path: source.to_string(),
            source: e,
        })?
    };
    parse_region_map(&text, countries)
}

/// Parses M49 text. Rows whose ISO-3 code is not in `countries` are skipped
/// with a warning.
pub fn parse_region_map(text: &str, countries: &[CountryMeta]) -> Result<RegionMap, IngestError> {
    let text = text.trim_start_matches('\u{feff}');
    let first_line = text.lines().next().unwrap_or("").trim();
    if first_line.is_empty() {
        return Err(IngestError::Invalid("M49 source is empty".into()));
    }
    let delimiter = if first_line.contains(';') { b';' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| IngestError::Invalid(format!("M49 header: {e}")))?
        .iter()
        .map(|h| h.trim().to_lowercase())
        .collect();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let iso_col = col(ISO3_COLUMN)
        .ok_or_else(|| IngestError::Invalid(format!("M49 source lacks a '{ISO3_COLUMN}' column")))?;
    let level_cols: Vec<(usize, RegionLevel)> = LEVEL_COLUMNS
        .iter()
        .filter_map(|(name, level)| col(name).map(|i| (i, *level)))
        .collect();
    if level_cols.is_empty() {
        return Err(IngestError::Invalid("M49 source has no region name columns".into()));
    }

    let known: HashSet<&CountryCode> = countries.iter().map(|c| &c.code).collect();
    let mut map = RegionMap::new();
    let mut rows = 0usize;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| IngestError::Invalid(format!("M49 row {}: {e}", i + 2)))?;
        rows += 1;
        let iso = record.get(iso_col).unwrap_or("").trim();
        if iso.is_empty() {
            continue;
        }
        let code = match CountryCode::parse(iso) {
            Ok(c) if known.contains(&c) => c,
            _ => {
                warn!("M49 row {}: country '{iso}' not in country table; skipped", i + 2);
                continue;
            }
        };
        for &(idx, level) in &level_cols {
            let name = record.get(idx).unwrap_or("").trim();
            if !name.is_empty() {
                map.insert(name, level, code.clone());
            }
        }
    }
    if rows == 0 {
        return Err(IngestError::Invalid("M49 source has no data rows".into()));
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn countries() -> Vec<CountryMeta> {
        vec![
            CountryMeta::new("FRA", "France").unwrap(),
            CountryMeta::new("DEU", "Germany").unwrap(),
            CountryMeta::new("GHA", "Ghana").unwrap(),
        ]
    }

    const UNSD: &str = "\u{feff}Global Code;Global Name;Region Code;Region Name;Sub-region Code;Sub-region Name;Intermediate Region Code;Intermediate Region Name;Country or Area;M49 Code;ISO-alpha2 Code;ISO-alpha3 Code\n\
        001;World;150;Europe;155;Western Europe;;;France;250;FR;FRA\n\
        001;World;150;Europe;155;Western Europe;;;Germany;276;DE;DEU\n\
        001;World;002;Africa;202;Sub-Saharan Africa;011;Western Africa;Ghana;288;GH;GHA\n\
        001;World;002;Africa;202;Sub-Saharan Africa;011;Western Africa;Togo;768;TG;TGO\n\
        001;World;;;;;;;Antarctica;010;AQ;\n";

    #[test]
    fn all_levels_are_mapped() {
        let map = parse_region_map(UNSD, &countries()).unwrap();
        let we = map.get("western europe").unwrap();
        assert_eq!(we.level, RegionLevel::SubRegion);
        assert_eq!(we.members.len(), 2);
        let europe = map.get("Europe").unwrap();
        assert!(we.members.is_subset(&europe.members));
        assert_eq!(map.get("World").unwrap().members.len(), 3);
        assert_eq!(map.get("Western Africa").unwrap().level, RegionLevel::Intermediate);
        // Togo is not in the country table
        assert_eq!(map.get("Africa").unwrap().members.len(), 1);
    }

    #[test]
    fn two_regions_three_countries() {
        let text = "Region Name,ISO-alpha3 Code\nEurope,FRA\nEurope,DEU\nAfrica,GHA\n";
        let map = parse_region_map(text, &countries()).unwrap();
        assert_eq!(map.len(), 2);
    }

    #[test]
    fn empty_source_is_an_error() {
        assert!(parse_region_map("", &countries()).is_err());
        assert!(parse_region_map("Region Name,ISO-alpha3 Code\n", &countries()).is_err());
    }

    #[test]
    fn missing_iso_column_is_an_error() {
        assert!(parse_region_map("Region Name,Country\nEurope,France\n", &countries()).is_err());
    }
}
