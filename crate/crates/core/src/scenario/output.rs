//! CSV and JSON emission. Files are written to a temporary sibling and
//! renamed into place.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{QslError, Result};

/// Shortest representation that round-trips; "nan" for NaN and vacuous
/// values, "inf"/"-inf" for infinities.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:?}")
    }
}

pub fn format_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), format_f64)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| QslError::Io(e.to_string()))?;
    Ok(())
}

pub fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| QslError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner().map_err(|e| QslError::Io(e.to_string()))
}

pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    write_atomic(path, &csv_bytes(header, rows)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| QslError::Io(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
