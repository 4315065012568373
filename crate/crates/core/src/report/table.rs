use std::path::Path;

use crate::error::{Result, SpbkError};

/// Numeric table read from CSV, with the header row if one was present.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericTable {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
    /// Source line of each data row, for error messages.
    pub lines: Vec<u64>,
}

impl NumericTable {
    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    /// Errors on the first row with a missing value.
    pub fn require_complete(&self, path: &Path) -> Result<()> {
        for (row, &line) in self.rows.iter().zip(&self.lines) {
            if let Some(col) = row.iter().position(|v| v.is_nan()) {
                return Err(parse_error(
                    path,
                    line,
                    format!("column {}: missing value", col + 1),
                ));
            }
        }
        Ok(())
    }

    /// Index of a named column, case-insensitive.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header
            .as_ref()?
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
    }
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> SpbkError {
    SpbkError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// One-based line of a record, skipping the blank lines the reader passes over.
fn line_at(text: &str, pos: Option<&csv::Position>) -> u64 {
    pos.map_or(0, |p| {
        let mut end = (p.byte() as usize).min(text.len());
        while matches!(text.as_bytes().get(end), Some(b'\n' | b'\r')) {
            end += 1;
        }
        1 + text.as_bytes()[..end]
            .iter()
            .filter(|&&b| b == b'\n')
            .count() as u64
    })
}

fn csv_error(path: &Path, text: &str, e: csv::Error) -> SpbkError {
    let line = line_at(text, e.position());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => SpbkError::io(path, source),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => parse_error(
            path,
            line,
            format!("expected {expected_len} fields, found {len}"),
        ),
        other => parse_error(path, line, format!("{other:?}")),
    }
}

/// Parses comma-separated numbers; `#` starts a comment line.
///
/// The first record is a header when any of its cells is not a number.
/// Empty cells are read as NaN, marking a missing value.
pub fn parse_numeric_csv(text: &str, path: &Path) -> Result<NumericTable> {
    let uncommented: String = text
        .split_inclusive('\n')
        .map(|l| {
            if l.trim_start().starts_with('#') {
                "\n"
            } else {
                l
            }
        })
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(uncommented.as_bytes());
    let mut header = None;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, &uncommented, e))?;
        let line = line_at(&uncommented, record.position());
        let parsed: Vec<std::result::Result<f64, _>> =
            record.iter().map(|cell| cell.parse::<f64>()).collect();
        let textual = parsed
            .iter()
            .zip(record.iter())
            .any(|(p, cell)| p.is_err() && !cell.is_empty());
        if k == 0 && textual {
            header = Some(record.iter().map(str::to_owned).collect());
            continue;
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (col, (cell, value)) in record.iter().zip(parsed).enumerate() {
            match value {
                Ok(v) if v.is_finite() => row.push(v),
                _ if cell.is_empty() => row.push(f64::NAN),
                _ => {
                    return Err(parse_error(
                        path,
                        line,
                        format!(
                            "column {}: cannot read {cell:?} as a finite number",
                            col + 1
                        ),
                    ))
                }
            }
        }
        rows.push(row);
        lines.push(line);
    }
    if rows.is_empty() {
        return Err(parse_error(path, 0, "no data rows"));
    }
    Ok(NumericTable {
        header,
        rows,
        lines,
    })
}

pub fn read_numeric_csv(path: &Path) -> Result<NumericTable> {
    let text = std::fs::read_to_string(path).map_err(|e| SpbkError::io(path, e))?;
    parse_numeric_csv(&text, path)
}

/// Seventeen significant digits, enough to reproduce every `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Accumulates CSV records in memory; written out in one call.
pub struct CsvOut {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvOut {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn into_string(self) -> String {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("csv output is utf-8")
    }

    pub fn save(self, path: &Path) -> Result<()> {
        write_file(path, &self.into_string())
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| SpbkError::io(path, e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| SpbkError::Parameter(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_file(path, &text)
}
