//! Sweep orchestration and result tables.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::transport::{run_points, PointConfig};

use super::config::RunConfig;

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub curve_index: usize,
    pub curve_value: Option<f64>,
    pub point_index: usize,
    pub sweep_value: f64,
    pub i_forward: Option<f64>,
    pub i_backward: Option<f64>,
    pub rectification: Option<f64>,
    pub conductance: Option<f64>,
    /// `I₊ / α` with `α` the mean bath coupling of the point.
    pub scaled_current: Option<f64>,
    pub positivity_ok: Option<bool>,
    pub truncation_converged: Option<bool>,
    pub error: Option<String>,
}

impl Record {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<Record>,
    pub failed_points: usize,
}

impl RunOutput {
    pub fn all_failed(&self) -> bool {
        !self.records.is_empty() && self.failed_points == self.records.len()
    }
}

/// `(curve value, point config)` for every grid point, curve-major.
pub fn expand_points(config: &RunConfig) -> Vec<(usize, Option<f64>, usize, f64, PointConfig)> {
    let base = config.base_point();
    let curves: Vec<(Option<f64>, PointConfig)> = match &config.series {
        Some(s) => s.values.iter().map(|&v| (Some(v), s.axis.apply(&base, v))).collect(),
        None => vec![(None, base)],
    };
    let mut out = Vec::new();
    for (ci, (cv, curve_base)) in curves.into_iter().enumerate() {
        for (pi, &v) in config.sweep.values.iter().enumerate() {
            out.push((ci, cv, pi, v, config.sweep.axis.apply(&curve_base, v)));
        }
    }
    out
}

/// Evaluates every point of `config`; rows come back in curve/grid order.
pub fn run(config: &RunConfig, threads: Option<usize>) -> Result<RunOutput> {
    config.validate()?;
    let points = expand_points(config);
    let cfgs: Vec<PointConfig> = points.iter().map(|p| p.4).collect();
    let values: Vec<f64> = points.iter().map(|p| p.3).collect();
    let rows = run_points(&cfgs, &values, threads)?;

    let mut failed_points = 0;
    let records = points
        .iter()
        .zip(rows)
        .map(|(&(curve_index, curve_value, point_index, sweep_value, cfg), row)| match row.result {
            Ok(r) => Record {
                curve_index,
                curve_value,
                point_index,
                sweep_value,
                i_forward: Some(r.i_forward),
                i_backward: Some(r.i_backward),
                rectification: Some(r.rectification),
                conductance: r.conductance,
                scaled_current: Some(r.i_forward / cfg.baths.mean_alpha()),
                positivity_ok: Some(r.flags.positivity_ok),
                truncation_converged: r.flags.truncation_converged,
                error: None,
            },
            Err(e) => {
                failed_points += 1;
                Record {
                    curve_index,
                    curve_value,
                    point_index,
                    sweep_value,
                    i_forward: None,
                    i_backward: None,
                    rectification: None,
                    conductance: None,
                    scaled_current: None,
                    positivity_ok: None,
                    truncation_converged: None,
                    error: Some(e.to_string()),
                }
            }
        })
        .collect();
    Ok(RunOutput { records, failed_points })
}
