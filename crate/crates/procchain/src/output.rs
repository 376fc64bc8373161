//! CSV and JSON emission.
//!
//! Every file starts with provenance (configuration, code version, cache
//! keys, timestamp). The data section follows and depends only on the
//! configuration and the cached kernel values.

use crate::error::{AppError, AppResult};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub command: String,
    pub code_version: String,
    pub timestamp_unix: u64,
    pub cache_keys: Vec<String>,
}

impl Provenance {
    pub fn new(command: &str, code_version: &str, mut cache_keys: Vec<String>) -> Self {
        cache_keys.sort();
        cache_keys.dedup();
        Provenance {
            tool: format!("procchain {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            code_version: code_version.to_string(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            cache_keys,
        }
    }
}

/// A table with documented columns.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Table { columns: columns.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(), rows: Vec::new() }
    }

    pub fn add_column(&mut self, name: impl Into<String>, doc: impl Into<String>) {
        debug_assert!(self.rows.is_empty());
        self.columns.push((name.into(), doc.into()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_json(&self) -> Value {
        let names: Vec<&str> = self.columns.iter().map(|c| c.0.as_str()).collect();
        json!({ "columns": names, "rows": self.rows })
    }
}

/// Shortest round-trip form, with an exponent for very small or large
/// magnitudes; negative zero prints as `0`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn render_csv(table: &Table, prov: &Provenance, config: &[String]) -> String {
    let mut s = String::new();
    s.push_str(&format!("# {} {}\n", prov.tool, prov.command));
    s.push_str(&format!("# code_version: {}\n", prov.code_version));
    s.push_str(&format!("# timestamp_unix: {}\n", prov.timestamp_unix));
    for line in config {
        s.push_str(&format!("# config: {line}\n"));
    }
    for key in &prov.cache_keys {
        s.push_str(&format!("# cache_key: {key}\n"));
    }
    for (name, doc) in &table.columns {
        s.push_str(&format!("# column {name}: {doc}\n"));
    }
    s.push_str(&data_section(table));
    s
}

/// The part of a CSV file below the `#` header.
pub fn data_section(table: &Table) -> String {
    let mut s = String::new();
    s.push_str(&table.columns.iter().map(|c| c.0.as_str()).collect::<Vec<_>>().join(","));
    s.push('\n');
    for row in &table.rows {
        s.push_str(&row.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

fn csv_field(f: &str) -> std::borrow::Cow<'_, str> {
    if f.contains([',', '"', '\n']) {
        format!("\"{}\"", f.replace('"', "\"\"")).into()
    } else {
        f.into()
    }
}

pub fn render_json(prov: &Provenance, config: &std::collections::BTreeMap<String, String>, data: Value) -> AppResult<String> {
    let doc = json!({ "provenance": prov, "config": config, "data": data });
    serde_json::to_string_pretty(&doc).map_err(|e| AppError::Format { path: PathBuf::from("<json>"), message: e.to_string() })
}

pub fn write_file(dir: &Path, name: &str, text: &str) -> AppResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| AppError::io(&path, e))?;
    Ok(path)
}
