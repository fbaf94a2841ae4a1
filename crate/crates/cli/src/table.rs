//! Output tables: CSV and JSON emission with an embedded run manifest.
//!
//! Identical inputs produce byte-identical files: floats print with 17
//! significant digits, line endings are LF, and the manifest carries no
//! timestamps or host details.

use std::collections::BTreeMap;
use std::io::Write;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) if v.is_finite() => {
                serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, Into::into)
            }
            // JSON has no infinities; encode them as strings
            Cell::Num(v) => serde_json::Value::String(fmt_f64(*v)),
            Cell::Int(v) => (*v).into(),
            Cell::Text(s) => s.clone().into(),
        }
    }
}

/// 17 significant digits round-trips every f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "ragged table row");
        self.rows.push(row);
    }
}

/// Ordered key=value pairs describing a run; embedded in every output so the
/// file alone reproduces itself.
#[derive(Debug, Clone, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.push("command", command.to_string());
        m.push("version", env!("CARGO_PKG_VERSION").to_string());
        m
    }

    pub fn push(&mut self, key: &str, value: String) {
        self.entries.push((key.to_string(), value));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, fmt_f64(value));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Stderr rendering (may include execution hints like worker count that
    /// are deliberately absent from the embedded copy).
    pub fn eprint(&self, extra: &[(String, String)]) {
        for (k, v) in self.entries.iter().chain(extra) {
            eprintln!("manifest: {k}={v}");
        }
    }
}

pub fn to_csv(manifest: &Manifest, table: &Table) -> String {
    let mut out = String::new();
    for (k, v) in manifest.entries() {
        out.push_str("# ");
        out.push_str(k);
        out.push('=');
        out.push_str(v);
        out.push('\n');
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(manifest: &Manifest, table: &Table) -> String {
    let manifest_map: BTreeMap<&str, &str> = manifest
        .entries()
        .iter()
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .collect();
    let rows: Vec<Vec<serde_json::Value>> = table
        .rows
        .iter()
        .map(|r| r.iter().map(Cell::json).collect())
        .collect();
    let doc = serde_json::json!({
        "manifest": manifest_map,
        "columns": table.columns,
        "rows": rows,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("static structure");
    s.push('\n');
    s
}

/// Writes to the path, or stdout when no path is given.
pub fn emit(
    manifest: &Manifest,
    table: &Table,
    format: crate::OutputFormat,
    path: Option<&std::path::Path>,
) -> std::io::Result<()> {
    let payload = match format {
        crate::OutputFormat::Csv => to_csv(manifest, table),
        crate::OutputFormat::Json => to_json(manifest, table),
    };
    match path {
        Some(p) => std::fs::write(p, payload),
        None => std::io::stdout().write_all(payload.as_bytes()),
    }
}
