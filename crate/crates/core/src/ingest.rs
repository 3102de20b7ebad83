//! Reading series from text files.
//!
//! Accepted layouts: one number per line, or comma-separated columns with
//! the value column picked by a 1-based index. Blank lines and lines
//! starting with `#` are skipped.

use std::path::Path;

use crate::discretize::RealSeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestOptions {
    /// 1-based column holding the values.
    pub column: usize,
    /// 1-based column holding numeric timestamps, if any.
    pub time_column: Option<usize>,
    /// Treat values as prices and convert to log-returns log(p_t / p_{t−1}).
    pub log_returns: bool,
    /// Skip the first non-comment record.
    pub header: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            column: 1,
            time_column: None,
            log_returns: false,
            header: false,
        }
    }
}

pub fn ingest_path(path: &Path, opts: &IngestOptions) -> Result<RealSeries> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    ingest_str(&text, opts)
}

pub fn ingest_str(text: &str, opts: &IngestOptions) -> Result<RealSeries> {
    if opts.column == 0 || opts.time_column == Some(0) {
        return Err(Error::invalid("columns are numbered from 1"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.header)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut values = Vec::new();
    let mut times = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        values.push(field(&record, opts.column, line)?);
        if let Some(tc) = opts.time_column {
            times.push(field(&record, tc, line)?);
        }
        lines.push(line);
    }
    if values.is_empty() {
        return Err(Error::invalid("input contains no observations"));
    }
    if opts.log_returns {
        if let Some(i) = values.iter().position(|&p| p <= 0.0) {
            return Err(Error::Parse {
                line: lines[i],
                message: format!("price {} must be positive for log-returns", values[i]),
            });
        }
        if values.len() < 2 {
            return Err(Error::invalid("log-returns need at least two prices"));
        }
        values = values.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        if !times.is_empty() {
            times.remove(0);
        }
    }
    if opts.time_column.is_some() {
        RealSeries::with_timestamps(values, times)
    } else {
        RealSeries::new(values)
    }
}

fn field(record: &csv::StringRecord, column: usize, line: u64) -> Result<f64> {
    let raw = record.get(column - 1).ok_or_else(|| Error::Parse {
        line,
        message: format!("no column {column}"),
    })?;
    let v: f64 = raw.parse().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {raw:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value {raw:?}"),
        });
    }
    Ok(v)
}
