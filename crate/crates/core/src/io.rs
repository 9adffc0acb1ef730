//! File formats: data and labels as CSV, structured objects as JSON.
//!
//! Every writer renders to memory first and then replaces the target through
//! a sibling temporary file and a rename, so readers never see partial files.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidConfig(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    atomic_write(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read(path)?;
    Ok(serde_json::from_slice(&text)?)
}

/// Renders rows of numbers as headerless CSV using shortest round-trip
/// decimal formatting.
pub fn data_to_csv(data: &DataMatrix) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for i in 0..data.n_samples() {
        w.write_record(data.row(i).iter().map(|v| v.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn write_data_csv(path: &Path, data: &DataMatrix) -> Result<()> {
    atomic_write(path, &data_to_csv(data)?)
}

/// Parses a numeric CSV, one sample per row. A first row that does not parse
/// as numbers is taken as a header and skipped.
pub fn parse_data_csv(text: &[u8]) -> Result<DataMatrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if line == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("row {}: {e}", line + 1))),
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != rows[0].len()) {
        return Err(Error::Parse(format!(
            "row {} has {} columns, expected {}",
            bad + 1,
            rows[bad].len(),
            rows[0].len()
        )));
    }
    DataMatrix::from_rows(&rows)
}

pub fn read_data_csv(path: &Path) -> Result<DataMatrix> {
    parse_data_csv(&fs::read(path)?)
}

pub fn labels_to_csv(labels: &[usize]) -> Vec<u8> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    out.into_bytes()
}

pub fn write_labels_csv(path: &Path, labels: &[usize]) -> Result<()> {
    atomic_write(path, &labels_to_csv(labels))
}

/// Single-column integer labels; a non-numeric first line is a header.
pub fn parse_labels_csv(text: &[u8]) -> Result<Vec<usize>> {
    let text = std::str::from_utf8(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut labels = Vec::new();
    for (line, raw) in text.lines().enumerate() {
        let field = raw.trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<usize>() {
            Ok(l) => labels.push(l),
            Err(_) if line == 0 => continue,
            Err(e) => return Err(Error::Parse(format!("label line {}: {e}", line + 1))),
        }
    }
    Ok(labels)
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<usize>> {
    parse_labels_csv(&fs::read(path)?)
}

/// Writes a CSV with the given header and pre-formatted rows.
pub fn write_table_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    atomic_write(path, &bytes)
}
