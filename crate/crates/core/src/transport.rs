//! Steady-state heat currents, rectification, conductance and parameter
//! sweeps.
//!
//! Currents are measured into the right (qubit-side) bath. Forward bias puts
//! the hot bath on the left: `(T_L, T_R) = (T + ΔT/2, T - ΔT/2)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baths::{BathPair, BathSide, BathSpec, MatsubaraPolicy};
use crate::error::{Error, Result};
use crate::hilbert::{
    check_truncation_convergence, junction_eigensystem, EigenSystem, HamiltonianOptions,
    JunctionParams, TruncationConfig,
};
use crate::master_equation::{
    fsme_steady_state, golden_rule_rates, psme_with_tensor, select_coherent_pairs, Correlations,
    RateMatrix, RedfieldTensor, SteadyState, POSITIVITY_TOL,
};

/// Default `η/α` in the rectification quantifier.
pub const ETA_PER_ALPHA: f64 = 1e-5;
/// Relative temperature step of the finite-difference conductance.
pub const CONDUCTANCE_STEP: f64 = 1e-4;
/// Agreement required between the full- and half-step conductance.
pub const CONDUCTANCE_TOL: f64 = 1e-4;
/// Most negative density-matrix eigenvalue tolerated in PSME mode.
pub const PSME_POSITIVITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    #[default]
    Fsme,
    Psme,
}

impl std::str::FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fsme" => Ok(Self::Fsme),
            "psme" => Ok(Self::Psme),
            other => Err(Error::invalid("mode", format!("unknown solver mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub mode: SolverMode,
    pub coherence_threshold: f64,
    pub policy: MatsubaraPolicy,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { mode: SolverMode::Fsme, coherence_threshold: 0.1, policy: MatsubaraPolicy::default() }
    }
}

impl SolverOptions {
    pub fn new(mode: SolverMode) -> Self {
        Self { mode, ..Self::default() }
    }
}

/// Bath parameters without temperatures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSetup {
    pub alpha_left: f64,
    pub alpha_right: f64,
    #[serde(default = "default_omega_c")]
    pub omega_c_left: f64,
    #[serde(default = "default_omega_c")]
    pub omega_c_right: f64,
}

fn default_omega_c() -> f64 {
    5.0
}

impl BathSetup {
    /// Identical baths with cutoff `5 ω_r`.
    pub fn symmetric(alpha: f64) -> Self {
        Self { alpha_left: alpha, alpha_right: alpha, omega_c_left: 5.0, omega_c_right: 5.0 }
    }

    pub fn pair(&self, t_left: f64, t_right: f64) -> Result<BathPair> {
        BathPair::new(
            BathSpec::new(BathSide::Left, self.alpha_left, t_left, self.omega_c_left)?,
            BathSpec::new(BathSide::Right, self.alpha_right, t_right, self.omega_c_right)?,
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.pair(1.0, 1.0).map(|_| ())
    }

    /// Mean coupling, used for the default `η` and the scaled current.
    pub fn mean_alpha(&self) -> f64 {
        0.5 * (self.alpha_left + self.alpha_right)
    }

    fn decoupled(&self) -> bool {
        self.alpha_left == 0.0 || self.alpha_right == 0.0
    }
}

/// Current into bath `R` (`I_R`) and into bath `L` (`I_L`) for one steady
/// state.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSolution {
    pub state: SteadyState,
    pub i_right: f64,
    pub i_left: f64,
}

/// `I = -2 Re Σ Q_{m'n} Q_{nn'} W̄_{nm'} ρ_{n'm'}` over the entries retained
/// in `state`, with `W̄ = ω W`.
pub fn heat_current_redfield(
    state: &SteadyState,
    eigsys: &EigenSystem,
    bath: &BathSpec,
    policy: &MatsubaraPolicy,
) -> Result<f64> {
    let corr = Correlations::new(eigsys, bath, policy)?;
    Ok(current_from_correlations(state, eigsys, &corr))
}

fn current_from_correlations(state: &SteadyState, eigsys: &EigenSystem, corr: &Correlations) -> f64 {
    let q = eigsys.q(corr.side);
    let mut sum = 0.0;
    for (np, mp, rho) in state.entries() {
        for n in 0..eigsys.n_levels() {
            let qq = q[(mp, n)] * q[(n, np)];
            if qq != 0.0 {
                sum += qq * (corr.w[(n, mp)] * eigsys.bohr(n, mp) * rho).re;
            }
        }
    }
    -2.0 * sum
}

/// `I = Σ_{nm} ω_mn Γ_nm ρ_mm`.
pub fn heat_current_secular(populations: &[f64], rates: &nalgebra::DMatrix<f64>, eigsys: &EigenSystem) -> f64 {
    let n = eigsys.n_levels();
    let mut sum = 0.0;
    for m in 0..n {
        for k in 0..n {
            if k != m {
                sum += eigsys.bohr(m, k) * rates[(k, m)] * populations[m];
            }
        }
    }
    sum
}

fn secular_solution(eigsys: &EigenSystem, rates: &RateMatrix) -> Result<PointSolution> {
    let state = fsme_steady_state(rates)?;
    let i_right = heat_current_secular(&state.populations, &rates.right, eigsys);
    let i_left = heat_current_secular(&state.populations, &rates.left, eigsys);
    Ok(PointSolution { state, i_right, i_left })
}

/// Steady state and both bath currents for fixed bath temperatures.
pub fn solve_point(eigsys: &EigenSystem, baths: &BathPair, solver: &SolverOptions) -> Result<PointSolution> {
    match solver.mode {
        SolverMode::Fsme => secular_solution(eigsys, &golden_rule_rates(eigsys, baths)),
        SolverMode::Psme => {
            let pairs = select_coherent_pairs(eigsys, solver.coherence_threshold)?;
            let tensor = RedfieldTensor::new(eigsys, baths, &solver.policy)?;
            let state = psme_with_tensor(&tensor, &pairs)?;
            let i_right = current_from_correlations(&state, eigsys, tensor.correlations(BathSide::Right));
            let i_left = current_from_correlations(&state, eigsys, tensor.correlations(BathSide::Left));
            Ok(PointSolution { state, i_right, i_left })
        }
    }
}

/// `I_R` at average temperature `t` and signed bias `dt`
/// (`T_L = t + dt/2`, `T_R = t - dt/2`).
pub fn current_at_bias(
    eigsys: &EigenSystem,
    setup: &BathSetup,
    t: f64,
    dt: f64,
    solver: &SolverOptions,
) -> Result<PointSolution> {
    let baths = setup.pair(t + 0.5 * dt, t - 0.5 * dt)?;
    solve_point(eigsys, &baths, solver)
}

fn check_bias(t: f64, dt: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("temperature", "must be finite and > 0"));
    }
    if !(dt >= 0.0 && dt < 2.0 * t) {
        return Err(Error::invalid("delta_t", format!("must satisfy 0 <= ΔT < 2T, got ΔT = {dt}, T = {t}")));
    }
    Ok(())
}

/// Forward and backward steady states of a fixed junction.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasPair {
    pub forward: Option<PointSolution>,
    pub backward: Option<PointSolution>,
    pub i_forward: f64,
    pub i_backward: f64,
}

pub fn forward_backward_eigsys(
    eigsys: &EigenSystem,
    setup: &BathSetup,
    t: f64,
    dt: f64,
    solver: &SolverOptions,
) -> Result<BiasPair> {
    check_bias(t, dt)?;
    if dt == 0.0 || setup.decoupled() {
        return Ok(BiasPair { forward: None, backward: None, i_forward: 0.0, i_backward: 0.0 });
    }
    let f = current_at_bias(eigsys, setup, t, dt, solver)?;
    let b = current_at_bias(eigsys, setup, t, -dt, solver)?;
    Ok(BiasPair { i_forward: f.i_right, i_backward: b.i_right, forward: Some(f), backward: Some(b) })
}

/// Builds the junction eigensystem for the given options.
pub fn build_eigensystem(
    params: &JunctionParams,
    setup: &BathSetup,
    truncation: &TruncationConfig,
    renormalize: bool,
) -> Result<EigenSystem> {
    // renormalization depends on α and ω_c only
    let baths = setup.pair(1.0, 1.0)?;
    junction_eigensystem(params, &baths, &HamiltonianOptions { truncation: *truncation, renormalize })
}

/// `(I₊, I₋)` into bath `R`.
#[allow(clippy::too_many_arguments)]
pub fn forward_backward(
    params: &JunctionParams,
    setup: &BathSetup,
    truncation: &TruncationConfig,
    renormalize: bool,
    t: f64,
    dt: f64,
    solver: &SolverOptions,
) -> Result<(f64, f64)> {
    let eigsys = build_eigensystem(params, setup, truncation, renormalize)?;
    let r = forward_backward_eigsys(&eigsys, setup, t, dt, solver)?;
    Ok((r.i_forward, r.i_backward))
}

/// `𝓡 = (I₊ + I₋) / (I₊ - I₋ + η/(I₊ - I₋))`.
pub fn rectification(i_forward: f64, i_backward: f64, eta: f64) -> Result<f64> {
    if !(eta >= 0.0) {
        return Err(Error::invalid("eta", "must be >= 0"));
    }
    let d = i_forward - i_backward;
    if d == 0.0 {
        if eta == 0.0 || i_forward + i_backward != 0.0 {
            return Err(Error::UndefinedRectification);
        }
        return Ok(0.0);
    }
    Ok((i_forward + i_backward) / (d + eta / d))
}

/// `dI₊/dΔT` at zero bias by central differences, verified against a half
/// step.
pub fn conductance_eigsys(eigsys: &EigenSystem, setup: &BathSetup, t: f64, solver: &SolverOptions) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("temperature", "must be finite and > 0"));
    }
    if setup.decoupled() {
        return Ok(0.0);
    }
    let kappa = |h: f64| -> Result<f64> {
        let up = current_at_bias(eigsys, setup, t, h, solver)?.i_right;
        let down = current_at_bias(eigsys, setup, t, -h, solver)?.i_right;
        Ok((up - down) / (2.0 * h))
    };
    let h = CONDUCTANCE_STEP * t;
    let full = kappa(h)?;
    let half = kappa(0.5 * h)?;
    if (full - half).abs() > CONDUCTANCE_TOL * full.abs().max(half.abs()) {
        return Err(Error::ConductanceInconsistent { full, half });
    }
    Ok(full)
}

pub fn conductance(
    params: &JunctionParams,
    setup: &BathSetup,
    truncation: &TruncationConfig,
    renormalize: bool,
    t: f64,
    solver: &SolverOptions,
) -> Result<f64> {
    let eigsys = build_eigensystem(params, setup, truncation, renormalize)?;
    conductance_eigsys(&eigsys, setup, t, solver)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportFlags {
    /// No density-matrix eigenvalue below the mode's tolerance.
    pub positivity_ok: bool,
    /// Smallest density-matrix eigenvalue over both bias directions.
    pub min_eigenvalue: f64,
    /// `None` when the check was not requested.
    pub truncation_converged: Option<bool>,
    /// A least-squares fallback was needed.
    pub least_squares: bool,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    pub i_forward: f64,
    pub i_backward: f64,
    pub rectification: f64,
    pub conductance: Option<f64>,
    pub flags: TransportFlags,
}

/// Everything needed to evaluate one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointConfig {
    pub junction: JunctionParams,
    pub baths: BathSetup,
    pub truncation: TruncationConfig,
    pub temperature: f64,
    pub delta_t: f64,
    /// `None`: `1e-5 · α`.
    pub eta: Option<f64>,
    /// `None`: on in PSME mode, off in FSME mode.
    pub renormalize: Option<bool>,
    pub solver: SolverOptions,
    pub compute_conductance: bool,
    pub check_convergence: bool,
}

impl PointConfig {
    /// Defaults: `T = 0.25`, `ΔT = 0.1`, `α = 1e-2`, `ω_c = 5`, FSME.
    pub fn new(junction: JunctionParams) -> Self {
        Self {
            junction,
            baths: BathSetup::symmetric(1e-2),
            truncation: TruncationConfig::default(),
            temperature: 0.25,
            delta_t: 0.1,
            eta: None,
            renormalize: None,
            solver: SolverOptions::default(),
            compute_conductance: false,
            check_convergence: false,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or(ETA_PER_ALPHA * self.baths.mean_alpha())
    }

    pub fn renormalize(&self) -> bool {
        self.renormalize.unwrap_or(self.solver.mode == SolverMode::Psme)
    }

    pub fn validate(&self) -> Result<()> {
        self.junction.validate()?;
        self.baths.validate()?;
        self.truncation.validate()?;
        check_bias(self.temperature, self.delta_t)?;
        if let Some(eta) = self.eta {
            if !(eta >= 0.0 && eta.is_finite()) {
                return Err(Error::invalid("eta", "must be finite and >= 0"));
            }
        }
        if !(self.solver.coherence_threshold >= 0.0 && self.solver.coherence_threshold.is_finite()) {
            return Err(Error::invalid("coherence_threshold", "must be finite and >= 0"));
        }
        self.solver.policy.validate()
    }

    pub fn eigensystem(&self) -> Result<EigenSystem> {
        build_eigensystem(&self.junction, &self.baths, &self.truncation, self.renormalize())
    }
}

fn positivity_tol(mode: SolverMode) -> f64 {
    match mode {
        SolverMode::Fsme => POSITIVITY_TOL,
        SolverMode::Psme => PSME_POSITIVITY_TOL,
    }
}

/// Forward/backward currents, rectification, optional conductance and
/// diagnostics for one point.
pub fn evaluate_point(cfg: &PointConfig) -> Result<TransportResult> {
    cfg.validate()?;
    let eigsys = cfg.eigensystem()?;
    let pair = forward_backward_eigsys(&eigsys, &cfg.baths, cfg.temperature, cfg.delta_t, &cfg.solver)?;
    let rect = rectification(pair.i_forward, pair.i_backward, cfg.eta())?;

    let mut min_eigenvalue = f64::INFINITY;
    let mut least_squares = false;
    let mut max_residual: f64 = 0.0;
    for s in [&pair.forward, &pair.backward].into_iter().flatten() {
        min_eigenvalue = min_eigenvalue.min(s.state.min_eigenvalue());
        least_squares |= s.state.diagnostics.least_squares;
        max_residual = max_residual.max(s.state.diagnostics.residual);
    }
    if !min_eigenvalue.is_finite() {
        min_eigenvalue = 0.0;
    }
    let positivity_ok = min_eigenvalue >= -positivity_tol(cfg.solver.mode);
    if !positivity_ok {
        log::warn!("negative density-matrix eigenvalue {min_eigenvalue:e}");
    }

    let conductance = if cfg.compute_conductance {
        Some(conductance_eigsys(&eigsys, &cfg.baths, cfg.temperature, &cfg.solver)?)
    } else {
        None
    };

    let truncation_converged = if cfg.check_convergence {
        let observable = |trunc: &TruncationConfig| -> Result<f64> {
            if *trunc == cfg.truncation {
                return Ok(pair.i_forward);
            }
            let e = build_eigensystem(&cfg.junction, &cfg.baths, trunc, cfg.renormalize())?;
            Ok(forward_backward_eigsys(&e, &cfg.baths, cfg.temperature, cfg.delta_t, &cfg.solver)?.i_forward)
        };
        Some(check_truncation_convergence(&cfg.truncation, observable)?)
    } else {
        None
    };

    Ok(TransportResult {
        i_forward: pair.i_forward,
        i_backward: pair.i_backward,
        rectification: rect,
        conductance,
        flags: TransportFlags { positivity_ok, min_eigenvalue, truncation_converged, least_squares, max_residual },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Delta,
    Epsilon,
    G,
    DeltaT,
    Alpha,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Delta => "delta",
            Self::Epsilon => "epsilon",
            Self::G => "g",
            Self::DeltaT => "delta_t",
            Self::Alpha => "alpha",
        }
    }

    /// Copy of `base` with this axis set to `value`.
    pub fn apply(self, base: &PointConfig, value: f64) -> PointConfig {
        let mut c = *base;
        match self {
            Self::Delta => c.junction.delta = value,
            Self::Epsilon => c.junction.epsilon = value,
            Self::G => c.junction.g = value,
            Self::DeltaT => c.delta_t = value,
            Self::Alpha => {
                c.baths.alpha_left = value;
                c.baths.alpha_right = value;
            }
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub fixed: PointConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        validate_grid(&self.grid)
    }

    pub fn points(&self) -> Vec<PointConfig> {
        self.grid.iter().map(|&v| self.axis.apply(&self.fixed, v)).collect()
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must not be empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("grid", "values must be finite"));
    }
    let up = grid.windows(2).all(|w| w[1] > w[0]);
    let down = grid.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::invalid("grid", "must be strictly monotone"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub result: Result<TransportResult>,
}

/// Evaluates every grid point of `spec` (concurrently when `threads` allows)
/// and returns the rows in grid order.
pub fn sweep(spec: &SweepSpec, threads: Option<usize>) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    run_points(&spec.points(), &spec.grid, threads)
}

pub(crate) fn run_points(points: &[PointConfig], values: &[f64], threads: Option<usize>) -> Result<Vec<SweepRow>> {
    let eval = || -> Vec<SweepRow> {
        points
            .par_iter()
            .zip(values.par_iter())
            .enumerate()
            .map(|(index, (p, &value))| {
                let result = evaluate_point(p);
                if let Err(e) = &result {
                    log::warn!("point {index} ({value}) failed: {e}");
                }
                SweepRow { index, value, result }
            })
            .collect()
    };
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid("threads", e.to_string()))?;
            Ok(pool.install(eval))
        }
        None => Ok(eval()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn params(delta: f64, eps: f64, g: f64) -> JunctionParams {
        JunctionParams::new(delta, eps, g).unwrap()
    }

    fn eigsys(p: JunctionParams, n_levels: usize) -> EigenSystem {
        build_eigensystem(&p, &BathSetup::symmetric(0.01), &TruncationConfig::new(20, n_levels).unwrap(), false)
            .unwrap()
    }

    #[test]
    fn equilibrium_current_vanishes() {
        let e = eigsys(params(0.8, 0.3, 0.2), 5);
        let setup = BathSetup::symmetric(0.01);
        for mode in [SolverMode::Fsme, SolverMode::Psme] {
            let s = current_at_bias(&e, &setup, 0.4, 0.0, &SolverOptions::new(mode)).unwrap();
            assert!(s.i_right.abs() < 1e-12 * 0.01, "{mode:?}: {}", s.i_right);
        }
        let r = forward_backward_eigsys(&e, &setup, 0.4, 0.0, &SolverOptions::default()).unwrap();
        assert_eq!((r.i_forward, r.i_backward), (0.0, 0.0));
    }

    #[test]
    fn redfield_current_on_diagonal_state_equals_secular() {
        let e = eigsys(params(0.9, 0.2, 0.15), 5);
        let baths = BathSetup::symmetric(0.01).pair(0.35, 0.2).unwrap();
        let rates = golden_rule_rates(&e, &baths);
        let s = fsme_steady_state(&rates).unwrap();
        let pol = MatsubaraPolicy::default();
        for side in [BathSide::Left, BathSide::Right] {
            let general = heat_current_redfield(&s, &e, baths.get(side), &pol).unwrap();
            let secular = heat_current_secular(&s.populations, rates.bath(side), &e);
            assert!((general - secular).abs() <= 1e-12 * secular.abs(), "{general} vs {secular}");
        }
    }

    #[test]
    fn uniform_populations_symmetric_rates_give_zero() {
        let mut g = DMatrix::zeros(2, 2);
        g[(0, 1)] = 0.3;
        g[(1, 0)] = 0.3;
        g[(0, 0)] = -0.3;
        g[(1, 1)] = -0.3;
        let e = EigenSystem::new(vec![0.0, 1.0], DMatrix::identity(2, 2), DMatrix::identity(2, 2)).unwrap();
        assert_eq!(heat_current_secular(&[0.5, 0.5], &g, &e), 0.0);
    }

    #[test]
    fn energy_is_conserved() {
        let setup = BathSetup::symmetric(0.01);
        for (p, mode) in [
            (params(0.8, 0.3, 0.2), SolverMode::Fsme),
            (params(1.0, 0.0, 0.01), SolverMode::Psme),
            (params(0.7, 0.5, 0.01), SolverMode::Psme),
        ] {
            let e = eigsys(p, 5);
            let s = current_at_bias(&e, &setup, 0.25, 0.1, &SolverOptions::new(mode)).unwrap();
            let scale = s.i_left.abs().max(s.i_right.abs());
            assert!((s.i_left + s.i_right).abs() < 1e-10 * scale, "{mode:?}: {} {}", s.i_left, s.i_right);
        }
    }

    #[test]
    fn mirror_symmetric_junction_has_odd_current() {
        let mut q = DMatrix::zeros(3, 3);
        q[(0, 1)] = 0.7;
        q[(1, 0)] = 0.7;
        q[(1, 2)] = -0.4;
        q[(2, 1)] = -0.4;
        q[(0, 2)] = 0.2;
        q[(2, 0)] = 0.2;
        let e = EigenSystem::new(vec![0.0, 0.9, 1.7], q.clone(), q).unwrap();
        for mode in [SolverMode::Fsme, SolverMode::Psme] {
            let r = forward_backward_eigsys(&e, &BathSetup::symmetric(0.02), 0.3, 0.1, &SolverOptions::new(mode))
                .unwrap();
            assert!((r.i_forward + r.i_backward).abs() < 1e-12 * r.i_forward.abs());
            assert!(rectification(r.i_forward, r.i_backward, 1e-7).unwrap().abs() < 1e-11);
        }
    }

    #[test]
    fn usc_below_resonance_rectifies_backward() {
        let (ip, im) = forward_backward(
            &params(0.7, 0.0, 0.5),
            &BathSetup::symmetric(0.01),
            &TruncationConfig::default(),
            false,
            0.25,
            0.1,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(ip > 0.0 && im < 0.0);
        assert!(ip + im < 0.0);
    }

    #[test]
    fn rectification_formula() {
        assert_eq!(rectification(2.0, -2.0, 0.3).unwrap(), 0.0);
        assert_eq!(rectification(1.5, 0.0, 0.0).unwrap(), 1.0);
        assert!(rectification(1e-6, -0.5e-6, 1.0).unwrap().abs() < 1e-11);
        assert_eq!(rectification(0.0, 0.0, 0.0), Err(Error::UndefinedRectification));
        assert_eq!(rectification(0.0, 0.0, 1e-7).unwrap(), 0.0);
        assert!(rectification(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn fsme_current_scales_with_alpha() {
        let p = params(0.8, 0.1, 0.2);
        let t = TruncationConfig::default();
        let solver = SolverOptions::default();
        let (base, _) = forward_backward(&p, &BathSetup::symmetric(0.01), &t, false, 0.25, 0.1, &solver).unwrap();
        for c in [0.1, 10.0] {
            let (ic, _) =
                forward_backward(&p, &BathSetup::symmetric(0.01 * c), &t, false, 0.25, 0.1, &solver).unwrap();
            assert!((ic / c - base).abs() <= 1e-12 * base.abs());
        }
    }

    #[test]
    fn conductance_limits() {
        let p = params(1.0, 0.0, 0.2);
        let t = TruncationConfig::default();
        let solver = SolverOptions::default();
        assert_eq!(conductance(&p, &BathSetup::symmetric(0.0), &t, false, 1.0, &solver).unwrap(), 0.0);
        let setup = BathSetup::symmetric(0.01);
        let kappa = conductance(&p, &setup, &t, false, 1.0, &solver).unwrap();
        assert!(kappa > 0.0);
        let dt = 1e-3;
        let (ip, _) = forward_backward(&p, &setup, &t, false, 1.0, dt, &solver).unwrap();
        assert!((ip / kappa / dt - 1.0).abs() < 0.01);
    }

    #[test]
    fn bias_validation() {
        let p = PointConfig { delta_t: 0.5, ..PointConfig::new(params(1.0, 0.0, 0.1)) };
        assert!(evaluate_point(&p).is_err());
        let p = PointConfig { delta_t: -0.1, ..PointConfig::new(params(1.0, 0.0, 0.1)) };
        assert!(evaluate_point(&p).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(validate_grid(&[]).is_err());
        assert!(validate_grid(&[0.1, 0.1]).is_err());
        assert!(validate_grid(&[0.1, 0.3, 0.2]).is_err());
        assert!(validate_grid(&[0.3, 0.2, 0.1]).is_ok());
        assert!(validate_grid(&[f64::NAN]).is_err());
    }

    #[test]
    fn sweep_rows_in_grid_order_with_errors_in_row() {
        let fixed = PointConfig::new(params(1.0, 0.0, 0.05));
        let spec = SweepSpec { axis: SweepAxis::DeltaT, grid: vec![0.05, 0.1, 0.6], fixed };
        let rows = sweep(&spec, Some(3)).unwrap();
        assert_eq!(rows.iter().map(|r| r.index).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(rows[0].result.is_ok() && rows[1].result.is_ok());
        assert!(rows[2].result.is_err());
        let a = rows[0].result.as_ref().unwrap().i_forward;
        let b = rows[1].result.as_ref().unwrap().i_forward;
        assert!(b > a && a > 0.0);
    }

    #[test]
    fn alpha_axis_sets_both_baths() {
        let fixed = PointConfig::new(params(1.0, 0.0, 0.05));
        let c = SweepAxis::Alpha.apply(&fixed, 0.003);
        assert_eq!((c.baths.alpha_left, c.baths.alpha_right), (0.003, 0.003));
        assert!((c.eta() - 3e-8).abs() < 1e-20);
        let explicit = PointConfig { eta: Some(1e-9), ..fixed };
        assert_eq!(SweepAxis::Alpha.apply(&explicit, 0.5).eta(), 1e-9);
    }

    #[test]
    fn evaluate_point_reports_flags() {
        let cfg = PointConfig {
            compute_conductance: true,
            check_convergence: true,
            ..PointConfig::new(params(0.7, 0.0, 0.01))
        };
        let r = evaluate_point(&cfg).unwrap();
        assert!(r.i_forward >= 0.0 && r.i_backward <= 0.0);
        assert!(r.rectification.abs() <= 1.0);
        assert!(r.flags.positivity_ok);
        assert!(r.flags.truncation_converged.is_some());
        assert!(r.conductance.unwrap() > 0.0);
    }
}
