//! Analytic limits of the junction: generalized rotating-wave approximation
//! (GRWA), Jaynes–Cummings (RWA), two-level closed forms, the zero-crossing
//! estimate `g*` and a three-level partial-secular solution.
//!
//! All functions work in units `ω_r = 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::baths::{bose_occupation, spectral_density, w_function, w_imag_high_t, BathPair, BathSide, BathSpec, MatsubaraPolicy};
use crate::error::{Error, Result};
use crate::hilbert::{EigenSystem, JunctionParams};
use crate::master_equation::{CoherentPairSet, SolveDiagnostics, SteadyState};

/// Generalized Laguerre polynomial `L_n^k(x)` by upward recurrence.
pub fn laguerre_generalized(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for m in 1..n {
        let m = m as f64;
        let next = ((2.0 * m + 1.0 + k - x) * cur - (m + k) * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Dressed qubit gap `Δ̃_ij` for `i ≥ j`.
pub fn dressed_gap(i: usize, j: usize, params: &JunctionParams) -> Result<f64> {
    if i < j {
        return Err(Error::invalid("i", format!("dressed gap needs i >= j, got ({i}, {j})")));
    }
    let at = (2.0 * params.g).powi(2);
    let lag = laguerre_generalized(j, i - j, at);
    if i == j {
        return Ok(params.delta * (-0.5 * at).exp() * lag);
    }
    if at == 0.0 {
        return Ok(0.0);
    }
    // √(j!/i!) α̃^{(i-j)/2} in log space
    let log_ratio: f64 = -((j + 1)..=i).map(|k| (k as f64).ln()).sum::<f64>();
    let log_mag = -0.5 * at + 0.5 * (i - j) as f64 * at.ln() + 0.5 * log_ratio;
    Ok(params.delta * log_mag.exp() * lag)
}

/// `(u, v) = (X, -Ω)/√(X² + Ω²)`, with the `Ω → 0` limit `(0, -1)` when
/// both vanish.
fn mixing(x: f64, omega: f64) -> (f64, f64) {
    let h = x.hypot(omega);
    if h == 0.0 {
        return (0.0, -1.0);
    }
    (x / h, -omega / h)
}

/// `δ ∓ √(δ² + Ω²)` without cancellation.
fn split_roots(delta: f64, omega: f64) -> (f64, f64) {
    let s = delta.hypot(omega);
    let o2 = omega * omega;
    if delta >= 0.0 {
        let plus = delta + s;
        let minus = if plus > 0.0 { -o2 / plus } else { 0.0 };
        (minus, plus)
    } else {
        let minus = delta - s;
        let plus = if minus < 0.0 { -o2 / minus } else { 0.0 };
        (minus, plus)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrwaSpectrum {
    pub omega0: f64,
    /// `ω_n^-`, `ω_n^+` for `n = 1..=n_max` (index `n - 1`).
    pub omega_n_minus: Vec<f64>,
    pub omega_n_plus: Vec<f64>,
    pub u_n_minus: Vec<f64>,
    pub u_n_plus: Vec<f64>,
    pub v_n_minus: Vec<f64>,
    pub v_n_plus: Vec<f64>,
}

impl GrwaSpectrum {
    /// All levels in ascending order.
    pub fn levels(&self) -> Vec<f64> {
        let mut l = vec![self.omega0];
        l.extend(&self.omega_n_minus);
        l.extend(&self.omega_n_plus);
        l.sort_by(f64::total_cmp);
        l
    }
}

pub fn grwa_spectrum(params: &JunctionParams, n_max: usize) -> Result<GrwaSpectrum> {
    params.validate()?;
    if n_max < 1 {
        return Err(Error::invalid("n_max", "must be at least 1"));
    }
    let eps = params.epsilon;
    let g2 = params.g * params.g;
    let wq: Vec<f64> = (0..=n_max)
        .map(|n| dressed_gap(n, n, params).map(|d| d.hypot(eps)))
        .collect::<Result<_>>()?;
    let c = |n: usize, sign: f64| -> f64 {
        if wq[n] == 0.0 {
            return std::f64::consts::FRAC_1_SQRT_2;
        }
        ((wq[n] + sign * eps) / (2.0 * wq[n])).max(0.0).sqrt()
    };

    let mut s = GrwaSpectrum {
        omega0: -0.5 * wq[0] - g2,
        omega_n_minus: Vec::with_capacity(n_max),
        omega_n_plus: Vec::with_capacity(n_max),
        u_n_minus: Vec::with_capacity(n_max),
        u_n_plus: Vec::with_capacity(n_max),
        v_n_minus: Vec::with_capacity(n_max),
        v_n_plus: Vec::with_capacity(n_max),
    };
    for n in 1..=n_max {
        let delta_n = 0.5 * (wq[n] + wq[n - 1]) - 1.0;
        let big_omega = dressed_gap(n, n - 1, params)? * (c(n, 1.0) * c(n - 1, 1.0) + c(n, -1.0) * c(n - 1, -1.0));
        let (x_minus, x_plus) = split_roots(delta_n, big_omega);
        let base = n as f64 - 0.5 * wq[n] - g2;
        s.omega_n_minus.push(base + 0.5 * x_minus);
        s.omega_n_plus.push(base + 0.5 * x_plus);
        let (um, vm) = mixing(x_minus, big_omega);
        let (up, vp) = mixing(x_plus, big_omega);
        s.u_n_minus.push(um);
        s.v_n_minus.push(vm);
        s.u_n_plus.push(up);
        s.v_n_plus.push(vp);
    }
    Ok(s)
}

/// `(Q_L01, Q_R01)` of the GRWA two-level truncation at zero bias.
pub fn grwa_tls_elements(params: &JunctionParams) -> Result<(f64, f64)> {
    if params.epsilon != 0.0 {
        return Err(Error::invalid("epsilon", "GRWA matrix elements are only available at zero bias"));
    }
    let s = grwa_spectrum(params, 1)?;
    let (u, v) = (s.u_n_minus[0], s.v_n_minus[0]);
    Ok((2.0 * params.g * u + v, -u))
}

/// Jaynes–Cummings spectrum, amplitudes and the coupling matrix elements
/// of the three lowest levels.
#[derive(Debug, Clone, PartialEq)]
pub struct JcSpectrum {
    /// `ω_0, ω_1, ..., ω_{2 n_max}`.
    pub omega: Vec<f64>,
    pub u_n_minus: Vec<f64>,
    pub u_n_plus: Vec<f64>,
    pub v_n_minus: Vec<f64>,
    pub v_n_plus: Vec<f64>,
    pub detuning: f64,
    pub g_x: f64,
    pub g_z: f64,
    /// `Q_L` on levels 0, 1, 2.
    pub q_left: DMatrix<f64>,
    /// `Q_R` on levels 0, 1, 2.
    pub q_right: DMatrix<f64>,
}

pub fn jc_spectrum_and_elements(params: &JunctionParams, n_max: usize) -> Result<JcSpectrum> {
    params.validate()?;
    if n_max < 1 {
        return Err(Error::invalid("n_max", "must be at least 1"));
    }
    let wq = params.qubit_frequency();
    if wq == 0.0 {
        return Err(Error::invalid("delta", "RWA needs a nonzero qubit frequency"));
    }
    let detuning = wq - 1.0;
    let g_x = params.g * params.delta / wq;
    let g_z = params.g * params.epsilon / wq;

    let mut s = JcSpectrum {
        omega: vec![-0.5 * wq],
        u_n_minus: Vec::new(),
        u_n_plus: Vec::new(),
        v_n_minus: Vec::new(),
        v_n_plus: Vec::new(),
        detuning,
        g_x,
        g_z,
        q_left: DMatrix::zeros(3, 3),
        q_right: DMatrix::zeros(3, 3),
    };
    for n in 1..=n_max {
        let coupling = 2.0 * (n as f64).sqrt() * g_x;
        let root = detuning.hypot(coupling);
        s.omega.push(n as f64 - 0.5 - 0.5 * root);
        s.omega.push(n as f64 - 0.5 + 0.5 * root);
        let (x_minus, x_plus) = split_roots(detuning, coupling);
        let (um, vm) = mixing(x_minus, coupling);
        let (up, vp) = mixing(x_plus, coupling);
        s.u_n_minus.push(um);
        s.v_n_minus.push(vm);
        s.u_n_plus.push(up);
        s.v_n_plus.push(vp);
    }

    let (um, up, vm, vp) = (s.u_n_minus[0], s.u_n_plus[0], s.v_n_minus[0], s.v_n_plus[0]);
    let (sx, sz) = (params.delta / wq, params.epsilon / wq);
    let mut ql = DMatrix::zeros(3, 3);
    let mut qr = DMatrix::zeros(3, 3);
    ql[(0, 1)] = vm;
    ql[(0, 2)] = vp;
    qr[(0, 1)] = um * sx;
    qr[(0, 2)] = up * sx;
    qr[(1, 2)] = (vm * vp - um * up) * sz;
    qr[(0, 0)] = sz;
    qr[(1, 1)] = (vm * vm - um * um) * sz;
    qr[(2, 2)] = (vp * vp - up * up) * sz;
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        ql[(b, a)] = ql[(a, b)];
        qr[(b, a)] = qr[(a, b)];
    }
    s.q_left = ql;
    s.q_right = qr;
    Ok(s)
}

/// Three lowest Jaynes–Cummings levels as an [`EigenSystem`].
pub fn rwa_three_level_eigensystem(params: &JunctionParams) -> Result<EigenSystem> {
    let s = jc_spectrum_and_elements(params, 1)?;
    EigenSystem::new(s.omega[..3].to_vec(), s.q_left, s.q_right)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsCurrent {
    pub current: f64,
    /// Both rates vanish; `current` is 0 by convention.
    pub rates_vanish: bool,
}

/// Two-level current into bath `R`:
/// `ω γᴿγᴸ (n_L - n_R) / (γᴿ(1 + 2n_R) + γᴸ(1 + 2n_L))`.
pub fn tls_current(omega10: f64, gamma_left: f64, gamma_right: f64, t_left: f64, t_right: f64) -> Result<TlsCurrent> {
    if !(gamma_left >= 0.0 && gamma_right >= 0.0) {
        return Err(Error::invalid("gamma", "rates must be >= 0"));
    }
    if !(t_left > 0.0 && t_right > 0.0) {
        return Err(Error::invalid("temperature", "must be > 0"));
    }
    if gamma_left == 0.0 && gamma_right == 0.0 {
        return Ok(TlsCurrent { current: 0.0, rates_vanish: true });
    }
    let nl = bose_occupation(omega10, t_left)?;
    let nr = bose_occupation(omega10, t_right)?;
    let den = gamma_right * (1.0 + 2.0 * nr) + gamma_left * (1.0 + 2.0 * nl);
    Ok(TlsCurrent { current: omega10 * gamma_right * gamma_left * (nl - nr) / den, rates_vanish: false })
}

/// Two-level rate `γ = 2π G(ω₁₀) Q₀₁²` for one bath.
pub fn tls_rate(omega10: f64, q01: f64, bath: &BathSpec) -> f64 {
    2.0 * std::f64::consts::PI * spectral_density(omega10, bath) * q01 * q01
}

/// Coupling asymmetry `χ = (|Q_R01|² - |Q_L01|²)/(|Q_R01|² + |Q_L01|²)`.
pub fn tls_chi(q_left_01: f64, q_right_01: f64) -> Result<f64> {
    let (l, r) = (q_left_01 * q_left_01, q_right_01 * q_right_01);
    if l + r == 0.0 {
        return Err(Error::UndefinedChi);
    }
    Ok((r - l) / (r + l))
}

/// `𝓡 = χ (n_L - n_R)/(1 + n_L + n_R)`.
pub fn tls_rectification(chi: f64, omega10: f64, t_left: f64, t_right: f64) -> Result<f64> {
    if !(t_left > 0.0 && t_right > 0.0) {
        return Err(Error::invalid("temperature", "must be > 0"));
    }
    let nl = bose_occupation(omega10, t_left)?;
    let nr = bose_occupation(omega10, t_right)?;
    Ok(chi * (nl - nr) / (1.0 + nl + nr))
}

/// Second-order estimate of the coupling at which the two-level
/// rectification changes sign.
pub fn gstar_estimate(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid("delta", "must be > 0"));
    }
    if delta >= 1.0 {
        return Err(Error::OutOfValidity(format!("g* estimate needs Δ < ω_r, got Δ = {delta}")));
    }
    let r = 1.0 / delta;
    let radicand = 9.0 * r * r - 5.0 * r - 3.75;
    if radicand < 0.0 {
        return Err(Error::OutOfValidity(format!("negative radicand {radicand} at Δ = {delta}")));
    }
    Ok((r + 1.5 + radicand.sqrt()) / (8.0 * r + 4.0))
}

/// Level data of a three-level junction at zero bias: energies and the
/// off-diagonal elements `Q_01`, `Q_02` of each bath operator (`Q_12 = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelElements {
    pub omega: [f64; 3],
    pub q_left: [f64; 2],
    pub q_right: [f64; 2],
}

impl ThreeLevelElements {
    pub fn rwa(params: &JunctionParams) -> Result<Self> {
        let s = jc_spectrum_and_elements(params, 1)?;
        Ok(Self {
            omega: [s.omega[0], s.omega[1], s.omega[2]],
            q_left: [s.q_left[(0, 1)], s.q_left[(0, 2)]],
            q_right: [s.q_right[(0, 1)], s.q_right[(0, 2)]],
        })
    }

    pub fn eigensystem(&self) -> Result<EigenSystem> {
        let build = |q: [f64; 2]| {
            let mut m = DMatrix::zeros(3, 3);
            m[(0, 1)] = q[0];
            m[(1, 0)] = q[0];
            m[(0, 2)] = q[1];
            m[(2, 0)] = q[1];
            m
        };
        EigenSystem::new(self.omega.to_vec(), build(self.q_left), build(self.q_right))
    }

    fn q(&self, side: BathSide) -> [f64; 2] {
        match side {
            BathSide::Left => self.q_left,
            BathSide::Right => self.q_right,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelResult {
    pub state: SteadyState,
    /// Current into bath `R`.
    pub current_right: f64,
    /// Current into bath `L`.
    pub current_left: f64,
}

/// `W(ω)` evaluations used by the three-level solution.
struct BathW {
    w10: Complex64,
    w01: Complex64,
    w20: Complex64,
    w02: Complex64,
}

fn bath_w(e: &ThreeLevelElements, bath: &BathSpec, high_t: bool, policy: &MatsubaraPolicy) -> Result<BathW> {
    let w = |omega: f64| -> Result<Complex64> {
        let full = w_function(omega, bath, policy)?;
        Ok(if high_t { Complex64::new(full.re, w_imag_high_t(omega, bath)) } else { full })
    };
    let (w10, w20) = (e.omega[1] - e.omega[0], e.omega[2] - e.omega[0]);
    Ok(BathW { w10: w(w10)?, w01: w(-w10)?, w20: w(w20)?, w02: w(-w20)? })
}

/// Three-level partial-secular steady state with only `ρ₁₂` retained, and
/// the heat currents, from explicit level data.
pub fn three_level_from_elements(
    e: &ThreeLevelElements,
    baths: &BathPair,
    use_high_t_w: bool,
    policy: &MatsubaraPolicy,
) -> Result<ThreeLevelResult> {
    if !(e.omega[0] <= e.omega[1] && e.omega[1] <= e.omega[2]) {
        return Err(Error::invalid("omega", "levels must be ascending"));
    }
    let ws = [
        bath_w(e, &baths.left, use_high_t_w, policy)?,
        bath_w(e, &baths.right, use_high_t_w, policy)?,
    ];
    let sides = [BathSide::Left, BathSide::Right];
    let zero = Complex64::new(0.0, 0.0);

    let (mut k1212, mut k1200, mut k1211, mut k1222, mut k1112, mut k2212) = (zero, zero, zero, zero, zero, zero);
    let (mut g10, mut g01, mut g20, mut g02) = (0.0, 0.0, 0.0, 0.0);
    for (side, w) in sides.iter().zip(&ws) {
        let [q01, q02] = e.q(*side);
        k1212 -= w.w02 * (q01 * q01) + w.w01.conj() * (q02 * q02);
        k1200 += (w.w10 + w.w20.conj()) * (q02 * q01);
        k1211 -= w.w01.conj() * (q02 * q01);
        k1222 -= w.w02 * (q01 * q02);
        k1112 -= w.w01.conj() * (q01 * q02);
        k2212 -= w.w02 * (q02 * q01);
        g10 += 2.0 * q01 * q01 * w.w10.re;
        g01 += 2.0 * q01 * q01 * w.w01.re;
        g20 += 2.0 * q02 * q02 * w.w20.re;
        g02 += 2.0 * q02 * q02 * w.w02.re;
    }

    let omega12 = e.omega[1] - e.omega[2];
    let w = omega12 - k1212.im;
    let kp = k1212.re;
    let den = w * w + kp * kp;
    if den == 0.0 {
        return Err(Error::Singular("three-level coherence equation is degenerate".into()));
    }
    let k12 = [k1200, k1211, k1222];
    let a: Vec<f64> = k12.iter().map(|k| (k.im * w - kp * k.re) / den).collect();
    let b: Vec<f64> = k12.iter().map(|k| (w * k.re + kp * k.im) / den).collect();

    // Γ_ni including the diagonal outflow terms
    let gamma1 = [g10, -g01, 0.0];
    let gamma2 = [g20, 0.0, -g02];
    let tilde = |gamma: &[f64; 3], knn12: Complex64| -> [f64; 3] {
        [0, 1, 2].map(|i| gamma[i] + 2.0 * (knn12.re * a[i] + knn12.im * b[i]))
    };
    let t1 = tilde(&gamma1, k1112);
    let t2 = tilde(&gamma2, k2212);

    let a1 = t1[0] / (t1[0] - t1[1]);
    let b1 = (t1[2] - t1[0]) / (t1[0] - t1[1]);
    let a2 = t2[0] / (t2[0] - t2[2]);
    let b2 = (t2[1] - t2[0]) / (t2[0] - t2[2]);
    let p2 = (a2 + b2 * a1) / (1.0 - b2 * b1);
    let p1 = a1 + b1 * p2;
    let p0 = 1.0 - p1 - p2;
    let p = [p0, p1, p2];
    if p.iter().any(|x| !x.is_finite()) {
        return Err(Error::Singular("three-level population solution is not finite".into()));
    }
    let rho_re: f64 = (0..3).map(|i| a[i] * p[i]).sum();
    let rho_im: f64 = -(0..3).map(|i| b[i] * p[i]).sum::<f64>();

    let (w10, w20) = (e.omega[1] - e.omega[0], e.omega[2] - e.omega[0]);
    let current = |side: BathSide, w: &BathW| -> f64 {
        let [q01, q02] = e.q(side);
        let (wb10, wb01, wb20, wb02) = (w.w10 * w10, w.w01 * -w10, w.w20 * w20, w.w02 * -w20);
        -2.0 * ((q01 * q01 * wb10.re + q02 * q02 * wb20.re) * p0
            + q01 * q01 * wb01.re * p1
            + q02 * q02 * wb02.re * p2
            + q02 * q01 * ((wb02.re + wb01.re) * rho_re - (wb02.im - wb01.im) * rho_im))
    };

    Ok(ThreeLevelResult {
        current_left: current(BathSide::Left, &ws[0]),
        current_right: current(BathSide::Right, &ws[1]),
        state: SteadyState {
            populations: p.to_vec(),
            pairs: CoherentPairSet { pairs: vec![(1, 2)] },
            coherences: vec![Complex64::new(rho_re, rho_im)],
            diagnostics: SolveDiagnostics::default(),
        },
    })
}

/// Three-level RWA truncation at zero bias, with `ρ₁₂` the only retained
/// coherence and no bath renormalization. `use_high_t_w` replaces `Im W`
/// with its high-temperature form.
pub fn three_level_analytic(
    params: &JunctionParams,
    baths: &BathPair,
    use_high_t_w: bool,
    policy: &MatsubaraPolicy,
) -> Result<ThreeLevelResult> {
    if params.epsilon != 0.0 {
        return Err(Error::invalid("epsilon", "three-level solution requires zero bias"));
    }
    if params.g > 0.1 * params.delta.min(1.0) {
        log::warn!("three-level RWA solution used outside g ≪ ω_r, Δ (g = {}, Δ = {})", params.g, params.delta);
    }
    three_level_from_elements(&ThreeLevelElements::rwa(params)?, baths, use_high_t_w, policy)
}
