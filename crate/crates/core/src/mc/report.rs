//! Report persistence: JSON for machines, CSV tables, and two-column
//! gnuplot-ready files for every figure-like output.
//!
//! Runners fill `created_unix` with 0 so their output is byte-identical
//! across runs and worker counts; callers that want a wall-clock stamp set
//! it just before persisting.  Comparisons must ignore that one field.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::config::{ExperimentConfig, ExperimentKind, SampleMode};

/// Provenance block carried by every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    pub mode: SampleMode,
    pub master_seed: u64,
    pub replications: usize,
    /// Wall-clock stamp in seconds; 0 when produced by the library itself.
    /// Excluded from reproducibility comparisons.
    pub created_unix: u64,
}

impl ReportMeta {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        ReportMeta {
            schema_version: config.schema_version,
            kind: config.kind,
            mode: config.mode,
            master_seed: config.master_seed,
            replications: config.replications,
            created_unix: 0,
        }
    }

    /// Fills the wall-clock stamp; call right before persisting.
    pub fn stamp_now(&mut self) {
        self.created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
    }
}

/// Tabular view of a report: one CSV table plus named x/y column pairs that
/// become standalone plot files.
pub trait Tabular {
    fn headers(&self) -> Vec<&'static str>;
    /// One entry per header; `None` renders as an empty CSV cell.
    fn rows(&self) -> Vec<Vec<Option<f64>>>;
    /// `(name, x column, y column)` per figure-like output.
    fn plots(&self) -> Vec<(&'static str, usize, usize)> {
        Vec::new()
    }
}

fn cell(v: &Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

/// Writes any serializable value as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a JSON value written by [`write_json`].
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Writes the tabular view as CSV.
pub fn write_csv_table<T: Tabular>(table: &T, path: &Path) -> Result<()> {
    let headers = table.headers();
    let mut text = headers.join(",");
    text.push('\n');
    for row in table.rows() {
        if row.len() != headers.len() {
            return Err(Error::Format(format!(
                "table row has {} cells for {} headers",
                row.len(),
                headers.len()
            )));
        }
        let line: Vec<String> = row.iter().map(cell).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes one `<base>.<name>.dat` two-column file per declared plot,
/// skipping rows where either coordinate is missing.
pub fn write_plot_files<T: Tabular>(table: &T, base: &Path) -> Result<Vec<PathBuf>> {
    let rows = table.rows();
    let mut written = Vec::new();
    for (name, x, y) in table.plots() {
        let path = base.with_extension(format!("{name}.dat"));
        let mut text = String::new();
        for row in &rows {
            if let (Some(a), Some(b)) = (row[x], row[y]) {
                text.push_str(&format!("{a} {b}\n"));
            }
        }
        std::fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

/// Persists a report as `<base>.json` + `<base>.csv` + plot files, returning
/// every path written.
pub fn persist_report<T: Serialize + Tabular>(report: &T, base: &Path) -> Result<Vec<PathBuf>> {
    if let Some(dir) = base.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let json = base.with_extension("json");
    write_json(report, &json)?;
    let csv = base.with_extension("csv");
    write_csv_table(report, &csv)?;
    let mut written = vec![json, csv];
    written.extend(write_plot_files(report, base)?);
    Ok(written)
}
