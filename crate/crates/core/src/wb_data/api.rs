//! Client for the World Bank open-data API (paged JSON, `format=json`).
//!
//! Every list endpoint answers with a two-element array: a paging header
//! (`page`, `pages`, `per_page`, `total`) followed by the page of records, or
//! `null` when the page is empty. Errors come back as a one-element array
//! holding a `message` list.

use std::thread;
use std::time::Duration;

use serde_json::Value;
use thiserror::Error;
use tracing::{debug, warn};

use super::{CountryMeta, IndicatorCode, IndicatorMeta, ValueTable, YearRange};

pub const DEFAULT_API_BASE: &str = "https://api.worldbank.org/v2";

#[derive(Debug, Error)]
pub enum IngestError {
    /// Network-level failure; the request may succeed when retried.
    #[error("transport error fetching {url}: {message}")]
    Transport { url: String, message: String },
    #[error("HTTP {status} from {url}")]
    Http { url: String, status: u16 },
    #[error("malformed payload from {url}: {message}")]
    Parse { url: String, message: String },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl IngestError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, IngestError::Transport { .. })
    }
}

#[derive(Debug, Clone)]
pub struct WorldBankClient {
    base: String,
    agent: ureq::Agent,
    /// Extra query appended to the indicator listing request.
    indicator_query: String,
    per_page: usize,
    retries: u32,
    backoff: Duration,
}

impl WorldBankClient {
    pub fn new(base: &str) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .http_status_as_error(false)
            .build();
        Self {
            base: base.trim_end_matches('/').to_string(),
            agent: ureq::Agent::new_with_config(config),
            indicator_query: String::new(),
            per_page: 1000,
            retries: 3,
            backoff: Duration::from_millis(500),
        }
    }

    pub fn with_indicator_query(mut self, query: &str) -> Self {
        self.indicator_query = query.trim_start_matches(['?', '&']).to_string();
        self
    }

    pub fn with_retries(mut self, retries: u32, backoff: Duration) -> Self {
        self.retries = retries;
        self.backoff = backoff;
        self
    }

    pub fn with_per_page(mut self, per_page: usize) -> Self {
        self.per_page = per_page.max(1);
        self
    }

    /// All indicators listed by the featured-indicator endpoint, in API order.
    pub fn fetch_featured_indicators(&self) -> Result<Vec<IndicatorMeta>, IngestError> {
        let extra = if self.indicator_query.is_empty() {
            String::new()
        } else {
            format!("&{}", self.indicator_query)
        };
        let records = self.fetch_all_pages(&format!("{}/indicator?format=json{extra}", self.base))?;
        records
            .iter()
            .enumerate()
            .map(|(i, rec)| parse_indicator(rec).map_err(|m| self.parse_err("indicator", i, rec, m)))
            .collect()
    }

    /// Countries (aggregates such as "World" or income groups excluded).
    pub fn fetch_countries(&self) -> Result<Vec<CountryMeta>, IngestError> {
        let records = self.fetch_all_pages(&format!("{}/country?format=json", self.base))?;
        let mut out = Vec::new();
        for (i, rec) in records.iter().enumerate() {
            let region = rec
                .pointer("/region/value")
                .and_then(Value::as_str)
                .unwrap_or("")
                .trim();
            if region.eq_ignore_ascii_case("aggregates") {
                continue;
            }
            let id = str_field(rec, "id").map_err(|m| self.parse_err("country", i, rec, m))?;
            let name = str_field(rec, "name").map_err(|m| self.parse_err("country", i, rec, m))?;
            match CountryMeta::new(id, name) {
                Ok(c) => out.push(c),
                Err(e) => warn!("skipping country record {i}: {e}"),
            }
        }
        Ok(out)
    }

    /// Every non-null datum the API reports for `code` within `years`.
    pub fn fetch_indicator_data(
        &self,
        code: &IndicatorCode,
        years: YearRange,
    ) -> Result<ValueTable, IngestError> {
        let url = format!(
            "{}/country/all/indicator/{}?format=json&date={}:{}",
            self.base, code, years.start, years.end
        );
        let records = match self.fetch_all_pages(&url) {
            Err(IngestError::NotFound(_)) => return Err(IngestError::NotFound(code.to_string())),
            other => other?,
        };
        let mut table = ValueTable::new(code.clone());
        for (i, rec) in records.iter().enumerate() {
            let Some(value) = rec.get("value").and_then(Value::as_f64) else {
                continue;
            };
            let date = str_field(rec, "date").map_err(|m| self.parse_err("datum", i, rec, m))?;
            let Ok(year) = date.trim().parse::<i32>() else {
                return Err(self.parse_err("datum", i, rec, format!("bad date '{date}'")));
            };
            if !years.contains(year) || !value.is_finite() {
                continue;
            }
            let iso3 = rec
                .get("countryiso3code")
                .and_then(Value::as_str)
                .filter(|s| !s.is_empty())
                .or_else(|| rec.pointer("/country/id").and_then(Value::as_str));
            let Some(country) = iso3.and_then(|s| super::CountryCode::parse(s).ok()) else {
                debug!("datum {i} of {code} has no ISO-3 code; skipped");
                continue;
            };
            table
                .insert(country, year, value)
                .map_err(|e| IngestError::Invalid(e.to_string()))?;
        }
        Ok(table)
    }

    fn parse_err(&self, what: &str, index: usize, rec: &Value, message: String) -> IngestError {
        let id = rec
            .get("id")
            .and_then(Value::as_str)
            .map(|s| format!(" (id {s})"))
            .unwrap_or_default();
        IngestError::Parse {
            url: self.base.clone(),
            message: format!("{what} record {index}{id}: {message}"),
        }
    }

    fn fetch_all_pages(&self, url: &str) -> Result<Vec<Value>, IngestError> {
        let mut out = Vec::new();
        let mut page = 1usize;
        loop {
            let page_url = format!("{url}&per_page={}&page={page}", self.per_page);
            let body = self.get_with_retries(&page_url)?;
            let (pages, records) = split_page(&page_url, &body)?;
            out.extend(records);
            if page >= pages {
                break;
            }
            page += 1;
        }
        Ok(out)
    }

    fn get_with_retries(&self, url: &str) -> Result<Value, IngestError> {
        let mut attempt = 0;
        loop {
            match self.get_once(url) {
                Err(e) if e.is_retriable() && attempt < self.retries => {
                    attempt += 1;
                    warn!("{e}; retry {attempt}/{}", self.retries);
                    thread::sleep(self.backoff * attempt);
                }
                other => return other,
            }
        }
    }

    fn get_once(&self, url: &str) -> Result<Value, IngestError> {
        debug!("GET {url}");
        let transport = |e: ureq::Error| IngestError::Transport {
            url: url.to_string(),
            message: e.to_string(),
        };
        let mut resp = self.agent.get(url).call().map_err(transport)?;
        let status = resp.status().as_u16();
        if status >= 500 || status == 429 {
            return Err(IngestError::Transport {
                url: url.to_string(),
                message: format!("HTTP {status}"),
            });
        }
        if status == 404 {
            return Err(IngestError::NotFound(url.to_string()));
        }
        if !(200..300).contains(&status) {
            return Err(IngestError::Http {
                url: url.to_string(),
                status,
            });
        }
        let text = resp
            .body_mut()
            .with_config()
            .limit(256 * 1024 * 1024)
            .read_to_string()
            .map_err(transport)?;
        serde_json::from_str(&text).map_err(|e| IngestError::Parse {
            url: url.to_string(),
            message: e.to_string(),
        })
    }
}

/// Splits a paged response into (page count, records).
fn split_page(url: &str, body: &Value) -> Result<(usize, Vec<Value>), IngestError> {
    let parse = |message: String| IngestError::Parse {
        url: url.to_string(),
        message,
    };
    let arr = body
        .as_array()
        .ok_or_else(|| parse("expected a JSON array".into()))?;
    let header = arr.first().ok_or_else(|| parse("empty response array".into()))?;
    if let Some(msgs) = header.get("message") {
        let text = msgs
            .as_array()
            .and_then(|m| m.first())
            .map(|m| {
                format!(
                    "{} {}",
                    m.get("key").and_then(Value::as_str).unwrap_or(""),
                    m.get("value").and_then(Value::as_str).unwrap_or("")
                )
            })
            .unwrap_or_else(|| msgs.to_string());
        return Err(IngestError::NotFound(format!("{url}: {}", text.trim())));
    }
    let pages = match header.get("pages") {
        Some(Value::Number(n)) => n.as_u64().unwrap_or(0) as usize,
        Some(Value::String(s)) => s.parse().map_err(|_| parse(format!("bad pages '{s}'")))?,
        _ => return Err(parse("paging header has no 'pages'".into())),
    };
    let records = match arr.get(1) {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(r)) => r.clone(),
        Some(other) => return Err(parse(format!("expected record list, got {}", kind(other)))),
    };
    Ok((pages, records))
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn str_field<'a>(rec: &'a Value, key: &str) -> Result<&'a str, String> {
    rec.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| format!("missing string field '{key}'"))
}

fn parse_indicator(rec: &Value) -> Result<IndicatorMeta, String> {
    let id = str_field(rec, "id")?;
    let name = str_field(rec, "name")?;
    let description = rec.get("sourceNote").and_then(Value::as_str).unwrap_or("");
    IndicatorMeta::new(id, name, description).map_err(|e| e.to_string())
}
