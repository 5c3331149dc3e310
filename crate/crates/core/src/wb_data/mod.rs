//! World Bank indicator data: catalogue, countries, M49 regions and
//! per-indicator value tables, assembled into an immutable [`DataContext`].

mod api;
mod filter;
mod ingest;
mod m49;
mod paraphrase;
mod store;

pub use api::{IngestError, WorldBankClient, DEFAULT_API_BASE};
pub use ingest::{ingest, IngestSummary};
pub use filter::{filter_indicators, is_normalized_name};
pub use m49::{load_region_map, parse_region_map};
pub use paraphrase::{
    parse_paraphrase_reply, paraphrase_indicators, ParaphraseReport, PARAPHRASE_PROMPT,
};
pub use store::{load, persist, StoreError};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::fold;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CountryCode(String);

impl CountryCode {
    /// Validates and upper-cases a three-letter code.
    pub fn parse(s: &str) -> Result<Self, DataError> {
        let up = s.trim().to_ascii_uppercase();
        if up.len() == 3 && up.bytes().all(|b| b.is_ascii_uppercase()) {
            Ok(Self(up))
        } else {
            Err(DataError::InvalidCountryCode(s.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndicatorCode(String);

impl IndicatorCode {
    pub fn new(s: impl Into<String>) -> Result<Self, DataError> {
        let s = s.into();
        let t = s.trim();
        if t.is_empty() || t.contains(['/', '\\']) {
            return Err(DataError::InvalidIndicatorCode(s));
        }
        Ok(Self(t.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for IndicatorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorMeta {
    pub code: IndicatorCode,
    pub name: String,
    pub description: String,
    /// Either empty or exactly three distinct noun phrases.
    #[serde(default)]
    pub paraphrases: Vec<String>,
}

impl IndicatorMeta {
    pub fn new(code: &str, name: &str, description: &str) -> Result<Self, DataError> {
        Ok(Self {
            code: IndicatorCode::new(code)?,
            name: name.trim().to_string(),
            description: description.trim().to_string(),
            paraphrases: Vec::new(),
        })
    }

    /// The raw name followed by every paraphrase.
    pub fn all_names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.name.as_str()).chain(self.paraphrases.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountryMeta {
    pub code: CountryCode,
    pub name: String,
}

impl CountryMeta {
    pub fn new(code: &str, name: &str) -> Result<Self, DataError> {
        Ok(Self {
            code: CountryCode::parse(code)?,
            name: name.trim().to_string(),
        })
    }
}

/// Tier of the M49 hierarchy a region name belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionLevel {
    Global,
    Region,
    SubRegion,
    Intermediate,
}

impl RegionLevel {
    pub const ALL: [RegionLevel; 4] = [
        RegionLevel::Global,
        RegionLevel::Region,
        RegionLevel::SubRegion,
        RegionLevel::Intermediate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionLevel::Global => "global",
            RegionLevel::Region => "region",
            RegionLevel::SubRegion => "sub-region",
            RegionLevel::Intermediate => "intermediate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.as_str() == fold(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub level: RegionLevel,
    pub members: BTreeSet<CountryCode>,
}

/// Named regions to member countries. Names are unique after case-folding.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegionMap {
    regions: BTreeMap<String, Region>,
}

impl RegionMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `code` to region `name`, creating the region on first use.
    pub fn insert(&mut self, name: &str, level: RegionLevel, code: CountryCode) {
        let name = name.trim();
        self.regions
            .entry(fold(name))
            .or_insert_with(|| Region {
                name: name.to_string(),
                level,
                members: BTreeSet::new(),
            })
            .members
            .insert(code);
    }

    pub fn get(&self, name: &str) -> Option<&Region> {
        self.regions.get(&fold(name))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Region> {
        self.regions.values()
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }
}

/// Inclusive year range of the ingested data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub const DEFAULT: YearRange = YearRange {
        start: 2003,
        end: 2023,
    };

    pub fn new(start: i32, end: i32) -> Result<Self, DataError> {
        if start > end {
            return Err(DataError::InvalidYearRange(start, end));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

impl std::str::FromStr for YearRange {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(['-', ':'])
            .ok_or_else(|| DataError::Invalid(format!("year range '{s}' is not START-END")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<i32>()
                .map_err(|_| DataError::Invalid(format!("bad year '{t}' in range '{s}'")))
        };
        YearRange::new(parse(a)?, parse(b)?)
    }
}

/// Values of one indicator keyed by (country, year). Missing entries are
/// absent; stored values are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub indicator: IndicatorCode,
    values: BTreeMap<(CountryCode, i32), f64>,
}

impl ValueTable {
    pub fn new(indicator: IndicatorCode) -> Self {
        Self {
            indicator,
            values: BTreeMap::new(),
        }
    }

    /// Inserts a datum; non-finite values are rejected.
    pub fn insert(&mut self, country: CountryCode, year: i32, value: f64) -> Result<(), DataError> {
        if !value.is_finite() {
            return Err(DataError::NonFinite {
                indicator: self.indicator.to_string(),
                country: country.to_string(),
                year,
            });
        }
        self.values.insert((country, year), value);
        Ok(())
    }

    pub fn remove(&mut self, country: &CountryCode, year: i32) -> Option<f64> {
        self.values.remove(&(country.clone(), year))
    }

    pub fn get(&self, country: &CountryCode, year: i32) -> Option<f64> {
        // BTreeMap lookups need an owned key of the same type
        self.values.get(&(country.clone(), year)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CountryCode, i32, f64)> {
        self.values.iter().map(|((c, y), v)| (c, *y, *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("invalid country code '{0}' (expected three letters)")]
    InvalidCountryCode(String),
    #[error("invalid indicator code '{0}'")]
    InvalidIndicatorCode(String),
    #[error("invalid year range {0}..{1}")]
    InvalidYearRange(i32, i32),
    #[error("non-finite value for {indicator}/{country}/{year}")]
    NonFinite {
        indicator: String,
        country: String,
        year: i32,
    },
    #[error("unknown indicator code '{0}'")]
    UnknownIndicator(String),
    #[error("unknown country code '{0}'")]
    UnknownCountry(String),
    #[error("{0}")]
    Invalid(String),
}

/// Owned pieces of a [`DataContext`], used to build or rebuild one.
#[derive(Debug, Clone)]
pub struct ContextParts {
    pub years: YearRange,
    pub catalogue: Vec<IndicatorMeta>,
    pub countries: Vec<CountryMeta>,
    pub regions: RegionMap,
    /// Alias (any case) to canonical country name.
    pub aliases: BTreeMap<String, String>,
    pub tables: BTreeMap<IndicatorCode, ValueTable>,
}

/// Immutable view over all ingested data, with lookup indexes.
#[derive(Debug, Clone)]
pub struct DataContext {
    parts: ContextParts,
    country_by_code: HashMap<CountryCode, usize>,
    country_by_name: HashMap<String, usize>,
    indicator_by_code: HashMap<IndicatorCode, usize>,
    indicator_by_name: HashMap<String, usize>,
}

impl PartialEq for DataContext {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (&self.parts, &other.parts);
        a.years == b.years
            && a.catalogue == b.catalogue
            && a.countries == b.countries
            && a.regions == b.regions
            && a.aliases == b.aliases
            && a.tables == b.tables
    }
}

impl DataContext {
    /// Validates the context invariants and builds the lookup indexes.
    pub fn from_parts(parts: ContextParts) -> Result<Self, DataError> {
        let mut country_by_code = HashMap::new();
        let mut country_by_name = HashMap::new();
        for (i, c) in parts.countries.iter().enumerate() {
            if country_by_code.insert(c.code.clone(), i).is_some() {
                return Err(DataError::Invalid(format!("duplicate country code {}", c.code)));
            }
            if country_by_name.insert(fold(&c.name), i).is_some() {
                return Err(DataError::Invalid(format!("duplicate country name '{}'", c.name)));
            }
        }
        let mut indicator_by_code = HashMap::new();
        let mut indicator_by_name = HashMap::new();
        for (i, ind) in parts.catalogue.iter().enumerate() {
            if indicator_by_code.insert(ind.code.clone(), i).is_some() {
                return Err(DataError::Invalid(format!("duplicate indicator code {}", ind.code)));
            }
            if !(ind.paraphrases.is_empty() || ind.paraphrases.len() == 3) {
                return Err(DataError::Invalid(format!(
                    "indicator {} has {} paraphrases (expected 0 or 3)",
                    ind.code,
                    ind.paraphrases.len()
                )));
            }
            let distinct: BTreeSet<String> = ind.paraphrases.iter().map(|p| fold(p)).collect();
            if distinct.len() != ind.paraphrases.len() || distinct.contains("") {
                return Err(DataError::Invalid(format!(
                    "indicator {} has empty or repeated paraphrases",
                    ind.code
                )));
            }
            for name in ind.all_names() {
                // first registration wins when two indicators share a phrase
                indicator_by_name.entry(fold(name)).or_insert(i);
            }
        }
        for region in parts.regions.iter() {
            if let Some(code) = region.members.iter().find(|c| !country_by_code.contains_key(*c)) {
                return Err(DataError::Invalid(format!(
                    "region '{}' lists unknown country {code}",
                    region.name
                )));
            }
        }
        for (code, table) in &parts.tables {
            if code != &table.indicator || !indicator_by_code.contains_key(code) {
                return Err(DataError::UnknownIndicator(code.to_string()));
            }
            if let Some((c, y, _)) = table.iter().find(|(_, y, _)| !parts.years.contains(*y)) {
                return Err(DataError::Invalid(format!(
                    "{code}: year {y} for {c} outside {}",
                    parts.years
                )));
            }
        }
        for (alias, name) in &parts.aliases {
            if !country_by_name.contains_key(&fold(name)) {
                return Err(DataError::Invalid(format!(
                    "alias '{alias}' points at unknown country '{name}'"
                )));
            }
        }
        Ok(Self {
            parts,
            country_by_code,
            country_by_name,
            indicator_by_code,
            indicator_by_name,
        })
    }

    pub fn to_parts(&self) -> ContextParts {
        self.parts.clone()
    }

    pub fn years(&self) -> YearRange {
        self.parts.years
    }

    pub fn catalogue(&self) -> &[IndicatorMeta] {
        &self.parts.catalogue
    }

    pub fn countries(&self) -> &[CountryMeta] {
        &self.parts.countries
    }

    pub fn regions(&self) -> &RegionMap {
        &self.parts.regions
    }

    pub fn aliases(&self) -> &BTreeMap<String, String> {
        &self.parts.aliases
    }

    pub fn tables(&self) -> &BTreeMap<IndicatorCode, ValueTable> {
        &self.parts.tables
    }

    pub fn table(&self, code: &IndicatorCode) -> Option<&ValueTable> {
        self.parts.tables.get(code)
    }

    pub fn country(&self, code: &CountryCode) -> Option<&CountryMeta> {
        self.country_by_code.get(code).map(|&i| &self.parts.countries[i])
    }

    /// Resolves a country name (case-folded, trimmed) or configured alias.
    pub fn country_by_name(&self, name: &str) -> Option<&CountryMeta> {
        let key = fold(name);
        let idx = self.country_by_name.get(&key).or_else(|| {
            self.parts
                .aliases
                .iter()
                .find(|(alias, _)| fold(alias) == key)
                .and_then(|(_, canonical)| self.country_by_name.get(&fold(canonical)))
        })?;
        Some(&self.parts.countries[*idx])
    }

    pub fn indicator(&self, code: &str) -> Option<&IndicatorMeta> {
        let code = IndicatorCode::new(code).ok()?;
        self.indicator_by_code
            .get(&code)
            .map(|&i| &self.parts.catalogue[i])
    }

    /// Resolves a raw indicator name or any of its paraphrases.
    pub fn indicator_by_name(&self, name: &str) -> Option<&IndicatorMeta> {
        self.indicator_by_name
            .get(&fold(name))
            .map(|&i| &self.parts.catalogue[i])
    }

    /// The stored value, `Ok(None)` for missing data, or an error for unknown
    /// codes. Never fabricates a value.
    pub fn lookup_value(
        &self,
        country: &str,
        indicator: &str,
        year: i32,
    ) -> Result<Option<f64>, DataError> {
        let ind = self
            .indicator(indicator)
            .ok_or_else(|| DataError::UnknownIndicator(indicator.to_string()))?;
        let code = CountryCode::parse(country)
            .ok()
            .filter(|c| self.country_by_code.contains_key(c))
            .ok_or_else(|| DataError::UnknownCountry(country.to_string()))?;
        Ok(self.table(&ind.code).and_then(|t| t.get(&code, year)))
    }
}
