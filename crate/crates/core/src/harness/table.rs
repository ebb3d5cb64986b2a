use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantities::Unit;

/// Numeric result table. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub units: Vec<Unit>,
    pub rows: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Values written in front of the data as `# key=value` lines.
pub type Meta = BTreeMap<String, String>;

impl Table {
    pub fn new(name: &str, columns: &[(&str, Unit)]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.0.to_string()).collect(),
            units: columns.iter().map(|c| c.1).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_values(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| Some(*v)).collect());
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// CSV text: `# key=value` comments, header, one row per line.
    /// Floats use the shortest representation that parses back exactly.
    pub fn to_csv(&self, meta: &Meta) -> Result<String> {
        let mut out = String::new();
        for (k, v) in meta {
            writeln!(out, "# {k}={v}").expect("write to string");
        }
        let units: Vec<&str> = self.units.iter().map(|u| u.symbol()).collect();
        writeln!(out, "# units={}", units.join(",")).expect("write to string");
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()))
                .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
        out.push_str(std::str::from_utf8(&bytes).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn to_json(&self, meta: &Meta) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            meta: &'a Meta,
            #[serde(flatten)]
            table: &'a Table,
        }
        let mut s = serde_json::to_string_pretty(&Doc { meta, table: self })
            .map_err(|e| Error::Numerical(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, dir: &Path, format: Format, meta: &Meta) -> Result<std::path::PathBuf> {
        let path = dir.join(format!("{}.{}", self.name, format.extension()));
        let text = match format {
            Format::Csv => self.to_csv(meta)?,
            Format::Json => self.to_json(meta)?,
        };
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Validation(e.to_string())
}

/// A table read back from disk together with its comment metadata and the
/// 1-based file line of every data row.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTable {
    pub table: Table,
    pub meta: Meta,
    pub lines: Vec<u64>,
}

pub fn read_table(path: &Path) -> Result<LoadedTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    if path.extension().is_some_and(|e| e == "json") {
        #[derive(Deserialize)]
        struct Doc {
            #[serde(default)]
            meta: Meta,
            columns: Vec<String>,
            units: Vec<Unit>,
            rows: Vec<Vec<Option<f64>>>,
        }
        let doc: Doc = serde_json::from_str(&text)
            .map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        let lines = (1..=doc.rows.len() as u64).collect();
        return Ok(LoadedTable {
            table: Table { name, columns: doc.columns, units: doc.units, rows: doc.rows },
            meta: doc.meta,
            lines,
        });
    }
    parse_csv(&text, &name, &path.display().to_string())
}

pub(crate) fn parse_csv(text: &str, name: &str, origin: &str) -> Result<LoadedTable> {
    let mut meta = Meta::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some((k, v)) = line[1..].trim().split_once('=') {
            meta.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let columns: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Validation(format!("{origin}: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if columns.is_empty() || columns.iter().all(String::is_empty) {
        return Err(Error::Validation(format!("{origin}: missing header row")));
    }
    let units = match meta.get("units") {
        Some(u) => {
            let parsed: Vec<Unit> = u.split(',').map(|s| s.trim().parse()).collect::<Result<_>>()?;
            if parsed.len() != columns.len() {
                return Err(Error::Validation(format!(
                    "{origin}: {} units for {} columns",
                    parsed.len(),
                    columns.len()
                )));
            }
            parsed
        }
        None => vec![Unit::Dimensionless; columns.len()],
    };
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    let mut bad = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Validation(format!("{origin}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != columns.len() {
            bad.push(format!("line {line}: {} fields, expected {}", rec.len(), columns.len()));
            continue;
        }
        let mut row = Vec::with_capacity(rec.len());
        for (field, col) in rec.iter().zip(&columns) {
            if field.is_empty() {
                row.push(None);
            } else {
                match field.parse::<f64>() {
                    Ok(v) => row.push(Some(v)),
                    Err(_) => {
                        bad.push(format!("line {line}: column '{col}' value '{field}' is not a number"));
                        row.push(None);
                    }
                }
            }
        }
        rows.push(row);
        lines.push(line);
    }
    if !bad.is_empty() {
        return Err(Error::Validation(format!("{origin}: malformed rows: {}", bad.join("; "))));
    }
    Ok(LoadedTable {
        table: Table { name: name.to_string(), columns, units, rows },
        meta,
        lines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = Table::new("demo", &[("power", Unit::Watt), ("polarization", Unit::Dimensionless)]);
        t.push_values(&[0.1 + 0.2, 1.0 / 3.0]);
        t.push(vec![Some(1e-300), None]);
        t.push_values(&[-2.5e17, f64::MIN_POSITIVE]);
        let meta: Meta = [("config_sha256".to_string(), "ab".to_string())].into();
        let text = t.to_csv(&meta).unwrap();
        assert!(text.starts_with("# config_sha256=ab\n# units=W,dimensionless\npower,polarization\n"));
        let back = parse_csv(&text, "demo", "mem").unwrap();
        assert_eq!(back.table, t);
        assert_eq!(back.meta["config_sha256"], "ab");
        assert_eq!(back.lines, vec![4, 5, 6]);
    }

    #[test]
    fn malformed_rows_name_their_lines() {
        let err = parse_csv("x,y\n1,2\n2,abc\n3\n", "t", "mem").unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("line 4"), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let mut t = Table::new("demo", &[("time_s", Unit::Second)]);
        t.push_values(&[0.1 + 0.2]);
        let dir = tempfile::tempdir().unwrap();
        let path = t.write(dir.path(), Format::Json, &Meta::new()).unwrap();
        assert_eq!(read_table(&path).unwrap().table, t);
    }
}
