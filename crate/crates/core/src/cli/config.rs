//! Run configuration: TOML document, defaults and validation.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::baths::MatsubaraPolicy;
use crate::error::{Error, Result};
use crate::hilbert::{JunctionParams, TruncationConfig};
use crate::transport::{validate_grid, BathSetup, PointConfig, SolverMode, SolverOptions, SweepAxis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Gnuplot,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "gnuplot" => Ok(Self::Gnuplot),
            other => Err(Error::config("format", format!("unknown output format `{other}`"))),
        }
    }
}

/// One axis with an explicit, validated grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAxis")]
pub struct AxisGrid {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    start: f64,
    stop: f64,
    points: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    axis: SweepAxis,
    values: Option<Vec<f64>>,
    range: Option<RawRange>,
}

/// `points` values evenly spaced from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (points - 1) as f64;
            (0..points).map(|i| if i + 1 == points { stop } else { start + step * i as f64 }).collect()
        }
    }
}

impl TryFrom<RawAxis> for AxisGrid {
    type Error = String;

    fn try_from(raw: RawAxis) -> std::result::Result<Self, String> {
        let values = match (raw.values, raw.range) {
            (Some(v), None) => v,
            (None, Some(r)) => linspace(r.start, r.stop, r.points),
            (Some(_), Some(_)) => return Err("give either `values` or `range`, not both".into()),
            (None, None) => return Err("one of `values` or `range` is required".into()),
        };
        Ok(Self { axis: raw.axis, values })
    }
}

impl AxisGrid {
    pub fn new(axis: SweepAxis, values: Vec<f64>) -> Self {
        Self { axis, values }
    }
}

fn default_temperature() -> f64 {
    0.25
}

fn default_delta_t() -> f64 {
    0.1
}

fn default_threshold() -> f64 {
    0.1
}

fn default_junction() -> JunctionParams {
    JunctionParams { delta: 1.0, epsilon: 0.0, omega_r: 1.0, g: 0.01 }
}

fn default_baths() -> BathSetup {
    BathSetup::symmetric(1e-2)
}

fn default_sweep() -> AxisGrid {
    AxisGrid::new(SweepAxis::Delta, linspace(0.1, 2.0, 191))
}

/// A complete, validated run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: SolverMode,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_delta_t")]
    pub delta_t: f64,
    #[serde(default = "default_threshold")]
    pub coherence_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renormalize: Option<bool>,
    #[serde(default)]
    pub compute_conductance: bool,
    #[serde(default)]
    pub check_convergence: bool,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_junction")]
    pub junction: JunctionParams,
    #[serde(default = "default_baths")]
    pub baths: BathSetup,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub matsubara: MatsubaraPolicy,
    #[serde(default = "default_sweep")]
    pub sweep: AxisGrid,
    /// Optional second axis; one curve per value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<AxisGrid>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: SolverMode::Fsme,
            temperature: default_temperature(),
            delta_t: default_delta_t(),
            coherence_threshold: default_threshold(),
            eta: None,
            renormalize: None,
            compute_conductance: false,
            check_convergence: false,
            format: OutputFormat::Csv,
            output: None,
            junction: default_junction(),
            baths: default_baths(),
            truncation: TruncationConfig::default(),
            matsubara: MatsubaraPolicy::default(),
            sweep: default_sweep(),
            series: None,
        }
    }
}

fn keyed(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => {
            let key = if section.is_empty() { name.to_string() } else { format!("{section}.{name}") };
            Error::Config { key, reason }
        }
        other => other,
    }
}

impl RunConfig {
    /// Point configuration shared by every grid point before the axes are
    /// applied.
    pub fn base_point(&self) -> PointConfig {
        PointConfig {
            junction: self.junction,
            baths: self.baths,
            truncation: self.truncation,
            temperature: self.temperature,
            delta_t: self.delta_t,
            eta: self.eta,
            renormalize: self.renormalize,
            solver: SolverOptions {
                mode: self.mode,
                coherence_threshold: self.coherence_threshold,
                policy: self.matsubara,
            },
            compute_conductance: self.compute_conductance,
            check_convergence: self.check_convergence,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.junction.validate().map_err(|e| keyed("junction", e))?;
        self.baths.validate().map_err(|e| keyed("baths", e))?;
        self.truncation.validate().map_err(|e| keyed("truncation", e))?;
        self.matsubara.validate().map_err(|e| keyed("matsubara", e))?;
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::config("temperature", "must be finite and > 0"));
        }
        if !(self.delta_t >= 0.0 && self.delta_t.is_finite()) {
            return Err(Error::config("delta_t", "must be finite and >= 0"));
        }
        if self.delta_t >= 2.0 * self.temperature {
            return Err(Error::config(
                "delta_t",
                format!("ΔT = {} >= 2T = {} gives a non-positive cold temperature", self.delta_t, 2.0 * self.temperature),
            ));
        }
        if !(self.coherence_threshold >= 0.0 && self.coherence_threshold.is_finite()) {
            return Err(Error::config("coherence_threshold", "must be finite and >= 0"));
        }
        if let Some(eta) = self.eta {
            if !(eta >= 0.0 && eta.is_finite()) {
                return Err(Error::config("eta", "must be finite and >= 0"));
            }
        }
        validate_grid(&self.sweep.values).map_err(|e| keyed("sweep", e))?;
        if let Some(series) = &self.series {
            validate_grid(&series.values).map_err(|e| keyed("series", e))?;
            if series.axis == self.sweep.axis {
                return Err(Error::config("series.axis", "must differ from sweep.axis"));
            }
        }
        Ok(())
    }

    /// TOML text that parses back to `self`.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("document", e.to_string()))
    }
}

/// Parses and validates a TOML run configuration.
pub fn parse_config(source: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(source).map_err(|e| {
        let key = e.message().split('`').nth(1).unwrap_or("document").to_string();
        Error::config(key, e.to_string().trim().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}
