//! CSV and JSON writers. Numbers are printed with 17 significant digits so a
//! rerun reproduces files byte for byte.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{ExperimentError, Result};

/// `1.2345678901234567e-5` style, 17 significant digits.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt17).unwrap_or_default()
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(ExperimentError::io(dir)),
        _ => Ok(()),
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(ExperimentError::io(path))
}

fn csv_error(path: &Path, e: csv::Error) -> ExperimentError {
    ExperimentError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| ExperimentError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(e),
        })?;
    text.push('\n');
    fs::write(path, text).map_err(ExperimentError::io(path))
}

/// File-name friendly form of a method label.
pub fn slug(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    let trimmed = out.trim_matches('_');
    if trimmed.is_empty() {
        "method".into()
    } else {
        trimmed.into()
    }
}
