use std::path::Path;

use super::CliError;
use crate::types::{parse_iso, TimeSeries, Timestamps};

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub value_column: String,
    pub timestamp_column: String,
    /// Set when the user named the value column explicitly.
    pub value_column_explicit: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            value_column: "value".into(),
            timestamp_column: "timestamp".into(),
            value_column_explicit: false,
        }
    }
}

fn find(header: &csv::StringRecord, name: &str) -> Option<usize> {
    header.iter().position(|h| h.trim().eq_ignore_ascii_case(name))
}

/// Reads a `[timestamp,]value` CSV. A first row that names the value
/// column, or that holds no number at all, is taken as the header.
pub fn read_series_csv(path: &Path, opts: &CsvOptions) -> Result<TimeSeries, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = rdr.records();
    let parse_err = |e: csv::Error| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        CliError::Parse(format!("line {line}: {e}"))
    };

    let Some(first) = records.next() else {
        return Err(CliError::Parse(format!("{}: empty file", path.display())));
    };
    let first = first.map_err(parse_err)?;
    let is_header = find(&first, &opts.value_column).is_some()
        || first.iter().all(|f| f.parse::<f64>().is_err());

    let (value_idx, ts_idx, pending) = if is_header {
        let v = match find(&first, &opts.value_column) {
            Some(i) => i,
            None if first.len() == 1 && !opts.value_column_explicit => 0,
            None => {
                return Err(CliError::Parse(format!(
                    "line 1: no column named {:?} in header {:?}",
                    opts.value_column,
                    first.iter().collect::<Vec<_>>()
                )))
            }
        };
        (v, find(&first, &opts.timestamp_column), None)
    } else if first.len() >= 2 {
        (1, Some(0), Some(first))
    } else {
        (0, None, Some(first))
    };

    let mut values = Vec::new();
    let mut stamps: Vec<String> = Vec::new();
    let mut take = |rec: &csv::StringRecord| -> Result<(), CliError> {
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let raw = rec
            .get(value_idx)
            .ok_or_else(|| CliError::Parse(format!("line {line}: missing value column")))?;
        let v: f64 = raw
            .parse()
            .map_err(|_| CliError::Parse(format!("line {line}: cannot parse value {raw:?}")))?;
        values.push(v);
        if let Some(t) = ts_idx {
            let raw = rec
                .get(t)
                .ok_or_else(|| CliError::Parse(format!("line {line}: missing timestamp column")))?;
            if raw.parse::<i64>().is_err() && parse_iso(raw).is_none() {
                return Err(CliError::Parse(format!("line {line}: cannot parse timestamp {raw:?}")));
            }
            stamps.push(raw.to_string());
        }
        Ok(())
    };
    if let Some(rec) = pending {
        take(&rec)?;
    }
    for rec in records {
        take(&rec.map_err(parse_err)?)?;
    }

    let timestamps = ts_idx.map(|_| {
        let ints: Option<Vec<i64>> = stamps.iter().map(|s| s.parse().ok()).collect();
        match ints {
            Some(v) => Timestamps::Integer(v),
            None => Timestamps::Iso(stamps),
        }
    });
    Ok(TimeSeries { values, timestamps })
}
