//! Named figure protocols.

use crate::error::{Error, Result};
use crate::hilbert::{JunctionParams, TruncationConfig};
use crate::transport::{SolverMode, SweepAxis};

use super::config::{linspace, AxisGrid, RunConfig};

pub const PRESETS: [&str; 6] = ["fig3", "fig4a", "fig4b", "fig5", "fig6", "fig7"];

const G_SERIES: [f64; 6] = [0.01, 0.05, 0.1, 0.2, 0.3, 0.5];

fn junction(delta: f64, epsilon: f64, g: f64) -> JunctionParams {
    JunctionParams { delta, epsilon, omega_r: 1.0, g }
}

/// Full configuration of a named preset.
pub fn preset(name: &str) -> Result<RunConfig> {
    let base = RunConfig::default();
    let cfg = match name {
        // current and rectification vs Δ at ε = 0, one curve per g
        "fig3" => RunConfig {
            junction: junction(1.0, 0.0, 0.01),
            sweep: AxisGrid::new(SweepAxis::Delta, linspace(0.1, 2.0, 191)),
            series: Some(AxisGrid::new(SweepAxis::G, G_SERIES.to_vec())),
            ..base
        },
        // vs g at ε = 0, one curve per Δ
        "fig4a" => RunConfig {
            junction: junction(1.0, 0.0, 0.01),
            sweep: AxisGrid::new(SweepAxis::G, linspace(0.005, 0.6, 120)),
            series: Some(AxisGrid::new(SweepAxis::Delta, vec![0.2, 0.4, 0.6, 0.8, 1.0])),
            ..base
        },
        // 𝓡 on a Δ × g grid, long format
        "fig4b" => RunConfig {
            junction: junction(1.0, 0.0, 0.01),
            sweep: AxisGrid::new(SweepAxis::Delta, linspace(0.1, 1.5, 57)),
            series: Some(AxisGrid::new(SweepAxis::G, linspace(0.01, 0.6, 60))),
            ..base
        },
        // vs ΔT at T = 1, Δ = ω_r, with the linear conductance; more levels
        // are thermally reachable at this temperature
        "fig5" => RunConfig {
            temperature: 1.0,
            truncation: TruncationConfig { n_fock: 40, n_levels: 20 },
            compute_conductance: true,
            junction: junction(1.0, 0.0, 0.01),
            sweep: AxisGrid::new(SweepAxis::DeltaT, linspace(0.02, 1.0, 50)),
            series: Some(AxisGrid::new(SweepAxis::G, G_SERIES.to_vec())),
            ..base
        },
        // PSME vs Δ at g = 0.01, one curve per α
        "fig6" => RunConfig {
            mode: SolverMode::Psme,
            junction: junction(1.0, 0.0, 0.01),
            sweep: AxisGrid::new(SweepAxis::Delta, linspace(0.9, 1.1, 81)),
            series: Some(AxisGrid::new(SweepAxis::Alpha, vec![1e-4, 1e-3, 3e-3, 1e-2])),
            ..base
        },
        // PSME vs ε at Δ = 0.7, g = 0.01, one curve per α
        "fig7" => RunConfig {
            mode: SolverMode::Psme,
            junction: junction(0.7, 0.0, 0.01),
            sweep: AxisGrid::new(SweepAxis::Epsilon, linspace(-1.0, 1.0, 161)),
            series: Some(AxisGrid::new(SweepAxis::Alpha, vec![1e-4, 1e-3, 3e-3, 1e-2])),
            ..base
        },
        other => {
            return Err(Error::config(
                "preset",
                format!("unknown preset `{other}` (available: {})", PRESETS.join(", ")),
            ))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}
