//! CSV writers. Floats use the shortest representation that parses back to
//! the same value.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Row tag appended to files produced by the simulator.
pub const SIM_ORIGIN: &str = "sim";

pub fn prepare(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

pub fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

pub fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `x, source_1, …, source_N[, origin]` with one row per grid point.
pub fn write_grid(path: &Path, grid: &[f64], columns: &[Vec<f64>], origin: Option<&str>) -> Result<(), CliError> {
    let mut header = vec!["x".to_string()];
    header.extend((1..=columns.len()).map(|k| format!("source_{k}")));
    if origin.is_some() {
        header.push("origin".into());
    }
    let rows: Vec<Vec<String>> = grid
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let mut row = vec![x.to_string()];
            row.extend(columns.iter().map(|c| c[j].to_string()));
            row.extend(origin.map(str::to_string));
            row
        })
        .collect();
    write_rows(path, &header, &rows)
}

/// One summary entry; `source` is a 1-based index or `all`.
pub struct Entry {
    pub metric: String,
    pub source: String,
    pub value: f64,
}

impl Entry {
    pub fn new(metric: impl Into<String>, source: impl ToString, value: f64) -> Self {
        Self { metric: metric.into(), source: source.to_string(), value }
    }
}

/// `metric, source, value[, origin]`.
pub fn write_summary(path: &Path, entries: &[Entry], origin: Option<&str>) -> Result<(), CliError> {
    let mut header = vec!["metric".to_string(), "source".into(), "value".into()];
    if origin.is_some() {
        header.push("origin".into());
    }
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            let mut row = vec![e.metric.clone(), e.source.clone(), e.value.to_string()];
            row.extend(origin.map(str::to_string));
            row
        })
        .collect();
    write_rows(path, &header, &rows)
}
