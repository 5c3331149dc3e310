//! Fetch, filter and assemble a full context from the API and an M49 source.

use std::collections::BTreeMap;

use serde::Serialize;
use tracing::{info, warn};

use super::{
    filter_indicators, load_region_map, ContextParts, DataContext, IndicatorMeta, IngestError, WorldBankClient,
    YearRange,
};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestSummary {
    pub listed: usize,
    pub kept: usize,
    pub countries: usize,
    pub regions: usize,
    pub values: usize,
    /// Indicators the data endpoint did not know.
    pub missing_tables: Vec<String>,
}

/// Builds a context. Paraphrases already present in `previous` are carried
/// over by indicator code, so re-ingesting does not discard them.
pub fn ingest(
    client: &WorldBankClient,
    m49_source: &str,
    years: YearRange,
    aliases: BTreeMap<String, String>,
    previous: &[IndicatorMeta],
) -> Result<(DataContext, IngestSummary), IngestError> {
    let listed = client.fetch_featured_indicators()?;
    let mut summary = IngestSummary {
        listed: listed.len(),
        ..Default::default()
    };
    let mut catalogue = filter_indicators(listed);
    for ind in &mut catalogue {
        if let Some(p) = previous.iter().find(|p| p.code == ind.code && p.name == ind.name) {
            ind.paraphrases = p.paraphrases.clone();
        }
    }
    summary.kept = catalogue.len();
    info!("{} of {} indicators kept after filtering", summary.kept, summary.listed);

    let countries = client.fetch_countries()?;
    let regions = load_region_map(m49_source, &countries)?;
    summary.countries = countries.len();
    summary.regions = regions.len();

    let mut tables = BTreeMap::new();
    for ind in &catalogue {
        match client.fetch_indicator_data(&ind.code, years) {
            Ok(mut table) => {
                let unknown: Vec<_> = table
                    .iter()
                    .filter(|(c, _, _)| !countries.iter().any(|m| &m.code == *c))
                    .map(|(c, y, _)| (c.clone(), y))
                    .collect();
                for (c, y) in unknown {
                    table.remove(&c, y);
                }
                summary.values += table.len();
                tables.insert(ind.code.clone(), table);
            }
            Err(IngestError::NotFound(_)) => {
                warn!("no data endpoint for {}; indicator kept without values", ind.code);
                summary.missing_tables.push(ind.code.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    let ctx = DataContext::from_parts(ContextParts {
        years,
        catalogue,
        countries,
        regions,
        aliases,
        tables,
    })
    .map_err(|e| IngestError::Invalid(e.to_string()))?;
    Ok((ctx, summary))
}
