//! CSV, JSON and gnuplot writers and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::{OutputFormat, RunConfig};
use super::run::Record;

pub const CSV_COLUMNS: [&str; 12] = [
    "curve_index",
    "curve_value",
    "point_index",
    "sweep_value",
    "i_forward",
    "i_backward",
    "rectification",
    "conductance",
    "scaled_current",
    "positivity_ok",
    "truncation_converged",
    "error",
];

/// Run description stored next to the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub threads: Option<usize>,
    pub points: usize,
    pub failed_points: usize,
    /// Absent inside the JSON table to keep it reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Manifest {
    pub fn new(config: &RunConfig, threads: Option<usize>, records: &[Record]) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            threads,
            points: records.len(),
            failed_points: records.iter().filter(|r| r.failed()).count(),
            wall_time_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonTable {
    pub manifest: Manifest,
    pub records: Vec<Record>,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

pub fn write_csv<W: Write>(records: &[Record], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(io_err)?;
    for r in records {
        w.write_record([
            r.curve_index.to_string(),
            opt(&r.curve_value),
            r.point_index.to_string(),
            r.sweep_value.to_string(),
            opt(&r.i_forward),
            opt(&r.i_backward),
            opt(&r.rectification),
            opt(&r.conductance),
            opt(&r.scaled_current),
            opt(&r.positivity_ok),
            opt(&r.truncation_converged),
            opt(&r.error),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(table: &JsonTable, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, table).map_err(io_err)?;
    writeln!(out)?;
    Ok(())
}

fn gp(v: &Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "NaN".into())
}

fn gp_flag(v: &Option<bool>) -> &'static str {
    match v {
        Some(true) => "1",
        Some(false) => "0",
        None => "NaN",
    }
}

/// One whitespace-separated block per curve, separated by two blank lines.
pub fn write_gnuplot<W: Write>(records: &[Record], config: &RunConfig, mut out: W) -> Result<()> {
    let sweep = config.sweep.axis.name();
    let mut curve = None;
    for r in records {
        if curve != Some(r.curve_index) {
            if curve.is_some() {
                writeln!(out, "\n")?;
            }
            curve = Some(r.curve_index);
            match (&config.series, r.curve_value) {
                (Some(s), Some(v)) => writeln!(out, "# curve {}: {} = {}", r.curve_index, s.axis.name(), v)?,
                _ => writeln!(out, "# curve {}", r.curve_index)?,
            }
            writeln!(
                out,
                "# {sweep} i_forward i_backward rectification conductance scaled_current positivity_ok truncation_converged"
            )?;
        }
        if let Some(e) = &r.error {
            writeln!(out, "# point {} ({sweep} = {}) failed: {e}", r.point_index, r.sweep_value)?;
        }
        writeln!(
            out,
            "{} {} {} {} {} {} {} {}",
            r.sweep_value,
            gp(&r.i_forward),
            gp(&r.i_backward),
            gp(&r.rectification),
            gp(&r.conductance),
            gp(&r.scaled_current),
            gp_flag(&r.positivity_ok),
            gp_flag(&r.truncation_converged),
        )?;
    }
    Ok(())
}

/// Renders the table in `format`; `manifest` is embedded in JSON.
pub fn emit_plot_data<W: Write>(
    records: &[Record],
    manifest: &Manifest,
    format: OutputFormat,
    out: W,
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::config("output", "result table is empty"));
    }
    match format {
        OutputFormat::Csv => write_csv(records, out),
        OutputFormat::Json => {
            let mut m = manifest.clone();
            m.wall_time_s = None;
            write_json(&JsonTable { manifest: m, records: records.to_vec() }, out)
        }
        OutputFormat::Gnuplot => write_gnuplot(records, &manifest.config, out),
    }
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest).map_err(io_err)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
