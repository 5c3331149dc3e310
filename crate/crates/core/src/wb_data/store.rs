//! CSV persistence of a [`DataContext`].
//!
//! Layout of a data directory:
//!
//! ```text
//! manifest.json            {"years": {"start", "end"}, "tables": [codes]}
//! indicators.csv           code,name,description,paraphrase_1,paraphrase_2,paraphrase_3
//! countries.csv            code,name
//! regions.csv              region,level,country_code
//! aliases.csv              alias,country_name
//! tables/<code>.csv        country_code,year,value
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    ContextParts, CountryCode, CountryMeta, DataContext, DataError, IndicatorCode, IndicatorMeta,
    RegionLevel, RegionMap, ValueTable, YearRange,
};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Row {
        file: String,
        line: u64,
        message: String,
    },
    #[error("{file}: {message}")]
    Schema { file: String, message: String },
    #[error("missing value table for indicator {code} (expected {path})")]
    MissingTable { code: String, path: String },
    #[error("invalid data: {0}")]
    Data(#[from] DataError),
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    years: YearRange,
    tables: Vec<IndicatorCode>,
}

const INDICATOR_HEADER: [&str; 6] = [
    "code",
    "name",
    "description",
    "paraphrase_1",
    "paraphrase_2",
    "paraphrase_3",
];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn table_path(dir: &Path, code: &IndicatorCode) -> PathBuf {
    dir.join("tables").join(format!("{code}.csv"))
}

fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), StoreError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let csv_err = |e: csv::Error| StoreError::Schema {
        file: path.display().to_string(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn persist(ctx: &DataContext, dir: &Path) -> Result<(), StoreError> {
    fs::create_dir_all(dir.join("tables")).map_err(io_err(dir))?;
    let manifest = Manifest {
        years: ctx.years(),
        tables: ctx.tables().keys().cloned().collect(),
    };
    let manifest_path = dir.join("manifest.json");
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n",
    )
    .map_err(io_err(&manifest_path))?;

    write_csv(
        &dir.join("indicators.csv"),
        &INDICATOR_HEADER,
        ctx.catalogue().iter().map(|i| {
            let mut row = vec![i.code.to_string(), i.name.clone(), i.description.clone()];
            for k in 0..3 {
                row.push(i.paraphrases.get(k).cloned().unwrap_or_default());
            }
            row
        }),
    )?;
    write_csv(
        &dir.join("countries.csv"),
        &["code", "name"],
        ctx.countries().iter().map(|c| [c.code.to_string(), c.name.clone()]),
    )?;
    let mut region_rows = Vec::new();
    for r in ctx.regions().iter() {
        for m in &r.members {
            region_rows.push([r.name.clone(), r.level.as_str().to_string(), m.to_string()]);
        }
    }
    write_csv(&dir.join("regions.csv"), &["region", "level", "country_code"], region_rows)?;
    write_csv(
        &dir.join("aliases.csv"),
        &["alias", "country_name"],
        ctx.aliases().iter().map(|(a, n)| [a.clone(), n.clone()]),
    )?;
    for (code, table) in ctx.tables() {
        write_csv(
            &table_path(dir, code),
            &["country_code", "year", "value"],
            // f64 Display is the shortest string that parses back exactly
            table
                .iter()
                .map(|(c, y, v)| [c.to_string(), y.to_string(), v.to_string()]),
        )?;
    }
    Ok(())
}

/// Reads a CSV file with the expected header, passing each record and its
/// 1-based line number to `row`.
fn read_csv(
    path: &Path,
    header: &[&str],
    mut row: impl FnMut(&csv::StringRecord) -> Result<(), String>,
) -> Result<(), StoreError> {
    let file = path.display().to_string();
    let mut r = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => StoreError::Io {
                path: file.clone(),
                source,
            },
            other => StoreError::Schema {
                file: file.clone(),
                message: format!("{other:?}"),
            },
        })?;
    let got: Vec<String> = r
        .headers()
        .map_err(|e| StoreError::Schema {
            file: file.clone(),
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if got != header {
        return Err(StoreError::Schema {
            file,
            message: format!("header is {got:?}, expected {header:?}"),
        });
    }
    for rec in r.records() {
        let rec = rec.map_err(|e| StoreError::Row {
            file: file.clone(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        row(&rec).map_err(|message| StoreError::Row {
            file: file.clone(),
            line,
            message,
        })?;
    }
    Ok(())
}

pub fn load(dir: &Path) -> Result<DataContext, StoreError> {
    let manifest_path = dir.join("manifest.json");
    let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| StoreError::Schema {
        file: manifest_path.display().to_string(),
        message: e.to_string(),
    })?;

    let mut catalogue = Vec::new();
    read_csv(&dir.join("indicators.csv"), &INDICATOR_HEADER, |rec| {
        let mut m = IndicatorMeta::new(&rec[0], &rec[1], &rec[2]).map_err(|e| e.to_string())?;
        m.paraphrases = (3..6)
            .map(|k| rec[k].trim().to_string())
            .filter(|p| !p.is_empty())
            .collect();
        catalogue.push(m);
        Ok(())
    })?;

    let mut countries = Vec::new();
    read_csv(&dir.join("countries.csv"), &["code", "name"], |rec| {
        countries.push(CountryMeta::new(&rec[0], &rec[1]).map_err(|e| e.to_string())?);
        Ok(())
    })?;

    let mut regions = RegionMap::new();
    read_csv(&dir.join("regions.csv"), &["region", "level", "country_code"], |rec| {
        let level = RegionLevel::parse(&rec[1]).ok_or_else(|| format!("unknown region level '{}'", &rec[1]))?;
        let code = CountryCode::parse(&rec[2]).map_err(|e| e.to_string())?;
        regions.insert(&rec[0], level, code);
        Ok(())
    })?;

    let mut aliases = BTreeMap::new();
    let alias_path = dir.join("aliases.csv");
    if alias_path.exists() {
        read_csv(&alias_path, &["alias", "country_name"], |rec| {
            aliases.insert(rec[0].trim().to_string(), rec[1].trim().to_string());
            Ok(())
        })?;
    }

    let mut tables = BTreeMap::new();
    for code in manifest.tables {
        let path = table_path(dir, &code);
        if !path.exists() {
            return Err(StoreError::MissingTable {
                code: code.to_string(),
                path: path.display().to_string(),
            });
        }
        let mut table = ValueTable::new(code.clone());
        read_csv(&path, &["country_code", "year", "value"], |rec| {
            let country = CountryCode::parse(&rec[0]).map_err(|e| e.to_string())?;
            let year: i32 = rec[1].trim().parse().map_err(|_| format!("bad year '{}'", &rec[1]))?;
            let value: f64 = rec[2].trim().parse().map_err(|_| format!("bad value '{}'", &rec[2]))?;
            table.insert(country, year, value).map_err(|e| e.to_string())
        })?;
        tables.insert(code, table);
    }

    Ok(DataContext::from_parts(ContextParts {
        years: manifest.years,
        catalogue,
        countries,
        regions,
        aliases,
        tables,
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{synthetic_context, tiny_context};

    #[test]
    fn round_trip_is_identity() {
        for ctx in [tiny_context(), synthetic_context(11)] {
            let dir = tempfile::tempdir().unwrap();
            persist(&ctx, dir.path()).unwrap();
            assert_eq!(load(dir.path()).unwrap(), ctx);
        }
    }

    #[test]
    fn missing_table_names_the_code() {
        let dir = tempfile::tempdir().unwrap();
        persist(&tiny_context(), dir.path()).unwrap();
        fs::remove_file(dir.path().join("tables/IS.RRS.TOTL.KM.csv")).unwrap();
        let err = load(dir.path()).unwrap_err();
        assert!(err.to_string().contains("IS.RRS.TOTL.KM"), "{err}");
    }

    #[test]
    fn hand_written_table_is_read() {
        let dir = tempfile::tempdir().unwrap();
        persist(&tiny_context(), dir.path()).unwrap();
        fs::write(
            dir.path().join("tables/AG.LND.CROP.ZS.csv"),
            "country_code,year,value\nGHA,2005,21.0\nNGA,2006,3.5\n",
        )
        .unwrap();
        let ctx = load(dir.path()).unwrap();
        let code = IndicatorCode::new("AG.LND.CROP.ZS").unwrap();
        assert_eq!(ctx.table(&code).unwrap().len(), 2);
        assert_eq!(ctx.lookup_value("NGA", "AG.LND.CROP.ZS", 2006).unwrap(), Some(3.5));
    }

    #[test]
    fn bad_row_reports_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        persist(&tiny_context(), dir.path()).unwrap();
        fs::write(
            dir.path().join("tables/AG.LND.CROP.ZS.csv"),
            "country_code,year,value\nGHA,2005,21.0\nGHA,2006,NaN\n",
        )
        .unwrap();
        let err = load(dir.path()).unwrap_err().to_string();
        assert!(err.contains("AG.LND.CROP.ZS.csv:3"), "{err}");
    }
}
