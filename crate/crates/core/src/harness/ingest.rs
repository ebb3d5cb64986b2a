use std::path::Path;

use crate::error::{Error, Result};
use crate::fit::ExperimentRecord;
use crate::quantities::{Quantity, Unit};

use super::table::{read_table, LoadedTable};

/// Which columns of a tabular file form the dataset, and what units the
/// caller expects. Missing column names fall back to positions 0, 1 and
/// (for exactly three columns) 2.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestSpec {
    pub x_column: Option<String>,
    pub y_column: Option<String>,
    pub sigma_column: Option<String>,
    pub x_unit: Option<Unit>,
    pub y_unit: Option<Unit>,
}

/// Loads a CSV table or JSON dataset into a validated record. Values are
/// converted to the expected units when the dimensions agree.
pub fn ingest(path: &Path, spec: &IngestSpec) -> Result<ExperimentRecord> {
    if !path.exists() {
        return Err(Error::io(path, std::io::Error::from(std::io::ErrorKind::NotFound)));
    }
    let origin = path.display().to_string();
    let is_json = path.extension().is_some_and(|e| e == "json");
    let (record, lines) = if is_json {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::Validation(format!("{origin}: {e}")))?;
        if value.get("columns").is_some() {
            from_table(read_table(path)?, spec, &origin)?
        } else {
            let rec: ExperimentRecord =
                serde_json::from_value(value).map_err(|e| Error::Validation(format!("{origin}: {e}")))?;
            let n = rec.x.len() as u64;
            (rec, (1..=n).collect())
        }
    } else {
        from_table(read_table(path)?, spec, &origin)?
    };
    let record = convert_units(record, spec)?;
    if record.is_empty() {
        return Err(Error::Validation(format!("{origin}: dataset has no data rows")));
    }
    let bad = record.non_increasing_indices();
    if !bad.is_empty() {
        let at: Vec<String> = bad.iter().map(|&i| lines[i].to_string()).collect();
        return Err(Error::Validation(format!(
            "{origin}: duplicate or non-increasing x at line(s) {}",
            at.join(", ")
        )));
    }
    record.validate()?;
    Ok(if record.source.is_empty() { record.with_source(origin) } else { record })
}

fn from_table(loaded: LoadedTable, spec: &IngestSpec, origin: &str) -> Result<(ExperimentRecord, Vec<u64>)> {
    let t = &loaded.table;
    let find = |name: &Option<String>, fallback: Option<usize>, what: &str| -> Result<Option<usize>> {
        match name {
            Some(n) => t
                .column_index(n)
                .map(Some)
                .ok_or_else(|| Error::Validation(format!("{origin}: no column '{n}' for {what}"))),
            None => Ok(fallback.filter(|i| *i < t.columns.len())),
        }
    };
    let xi = find(&spec.x_column, Some(0), "x")?
        .ok_or_else(|| Error::Validation(format!("{origin}: no x column")))?;
    let yi = find(&spec.y_column, Some(1), "y")?
        .ok_or_else(|| Error::Validation(format!("{origin}: need at least two columns")))?;
    let default_sigma = (spec.x_column.is_none() && spec.y_column.is_none() && t.columns.len() == 3).then_some(2);
    let si = find(&spec.sigma_column, default_sigma, "sigma")?;

    let mut x = Vec::with_capacity(t.rows.len());
    let mut y = Vec::with_capacity(t.rows.len());
    let mut sigma = si.map(|_| Vec::with_capacity(t.rows.len()));
    let mut missing = Vec::new();
    for (row, line) in t.rows.iter().zip(&loaded.lines) {
        match (row[xi], row[yi], si.map(|i| row[i])) {
            (Some(a), Some(b), None) => {
                x.push(a);
                y.push(b);
            }
            (Some(a), Some(b), Some(Some(s))) => {
                x.push(a);
                y.push(b);
                sigma.as_mut().expect("sigma column present").push(s);
            }
            _ => missing.push(line.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Validation(format!("{origin}: empty cells at line(s) {}", missing.join(", "))));
    }
    let mut rec = ExperimentRecord {
        source: String::new(),
        x_label: t.columns[xi].clone(),
        x_unit: t.units[xi],
        y_label: t.columns[yi].clone(),
        y_unit: t.units[yi],
        x,
        y,
        sigma,
    };
    if let Some(m) = loaded.meta.get("source") {
        rec.source = m.clone();
    }
    Ok((rec, loaded.lines.clone()))
}

fn convert_units(mut rec: ExperimentRecord, spec: &IngestSpec) -> Result<ExperimentRecord> {
    if let Some(want) = spec.x_unit {
        let k = Quantity::new(1.0, rec.x_unit).value_in(want)?;
        if k != 1.0 {
            rec.x.iter_mut().for_each(|v| *v *= k);
        }
        rec.x_unit = want;
    }
    if let Some(want) = spec.y_unit {
        let k = Quantity::new(1.0, rec.y_unit).value_in(want)?;
        if k != 1.0 {
            rec.y.iter_mut().for_each(|v| *v *= k);
            if let Some(s) = rec.sigma.as_mut() {
                s.iter_mut().for_each(|v| *v *= k);
            }
        }
        rec.y_unit = want;
    }
    Ok(rec)
}
