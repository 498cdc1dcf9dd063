//! Ohmic–Drude heat baths: spectral density, Bose factors and the one-sided
//! Fourier transform `W(ω)` of the bath correlation function.
//!
//! Conventions (`ħ = k_B = 1`):
//!
//! ```text
//! G(ω)  = α ω / (1 + (ω/ω_c)²)
//! W(ω)  = ∫₀^∞ dt ⟨B(t)B(0)⟩ e^{-iωt}
//! S(ω)  = 2 Re W(-ω)
//! ```
//!
//! `Re W(ω) = π G(ω) n(ω)` for either sign of `ω` (absorption for `ω > 0`,
//! emission for `ω < 0`). The imaginary part is evaluated in closed form up
//! to a Matsubara sum.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of the junction a bath attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BathSide {
    /// Couples to the resonator through `a + a†`.
    Left,
    /// Couples to the qubit through `σ_z`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub side: BathSide,
    pub alpha: f64,
    pub temperature: f64,
    pub omega_c: f64,
}

impl BathSpec {
    pub fn new(side: BathSide, alpha: f64, temperature: f64, omega_c: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be finite and >= 0, got {alpha}")));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::invalid(
                "temperature",
                format!("must be finite and > 0, got {temperature}"),
            ));
        }
        if !(omega_c > 0.0 && omega_c.is_finite()) {
            return Err(Error::invalid("omega_c", format!("must be finite and > 0, got {omega_c}")));
        }
        Ok(Self { side, alpha, temperature, omega_c })
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    /// Renormalization coefficient `μ = ∫₀^∞ dω G(ω)/ω = (π/2) α ω_c`.
    pub fn renormalization(&self) -> f64 {
        0.5 * PI * self.alpha * self.omega_c
    }
}

/// The two baths of the transport setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathPair {
    pub left: BathSpec,
    pub right: BathSpec,
}

impl BathPair {
    pub fn new(left: BathSpec, right: BathSpec) -> Result<Self> {
        if left.side != BathSide::Left || right.side != BathSide::Right {
            return Err(Error::invalid("baths", "expected one left and one right bath"));
        }
        Ok(Self { left, right })
    }

    pub fn get(&self, side: BathSide) -> &BathSpec {
        match side {
            BathSide::Left => &self.left,
            BathSide::Right => &self.right,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &BathSpec> {
        [&self.left, &self.right].into_iter()
    }
}

/// Truncation policy for the Matsubara sum in `Im W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatsubaraPolicy {
    pub rel_tol: f64,
    pub k_max: usize,
    /// Smallest tolerated `|ω_c - ν_k|`.
    pub pole_guard: f64,
}

impl Default for MatsubaraPolicy {
    fn default() -> Self {
        Self { rel_tol: 1e-12, k_max: 1_000_000, pole_guard: 1e-7 }
    }
}

impl MatsubaraPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-6) {
            return Err(Error::invalid("rel_tol", "must lie in (0, 1e-6)"));
        }
        if self.k_max < 10_000 {
            return Err(Error::invalid("k_max", "must be at least 1e4"));
        }
        if !(self.pole_guard > 0.0) {
            return Err(Error::invalid("pole_guard", "must be > 0"));
        }
        Ok(())
    }
}

/// Ohmic–Drude spectral density, odd in `omega`.
pub fn spectral_density(omega: f64, bath: &BathSpec) -> f64 {
    let x = omega / bath.omega_c;
    bath.alpha * omega / (1.0 + x * x)
}

/// Bose–Einstein occupation `1/(e^{ω/T} - 1)`.
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if omega == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// `G(ω) n(ω)`, finite and non-negative for both signs of `ω`.
fn weighted_occupation(omega: f64, bath: &BathSpec) -> f64 {
    if omega == 0.0 {
        // lim G(ω) n(ω) = α T
        return bath.alpha * bath.temperature;
    }
    // both factors change sign with ω
    spectral_density(omega, bath) / (omega / bath.temperature).exp_m1()
}

/// Power spectral density `S(ω) = 2 Re W(-ω)`.
pub fn power_spectrum(omega: f64, bath: &BathSpec) -> f64 {
    2.0 * PI * weighted_occupation(-omega, bath)
}

/// Partial sum of `Σ_k ν_k ω / ((ω_c² - ν_k²)(ω² + ν_k²))`.
///
/// Stops once three consecutive terms fall below `rel_tol` of the running
/// sum (past the cutoff pole), then adds the leading `-ω/ν_k³` tail.
fn matsubara_sum(omega: f64, bath: &BathSpec, policy: &MatsubaraPolicy) -> Result<f64> {
    let nu1 = 2.0 * PI * bath.temperature;
    let wc = bath.omega_c;

    let k_pole = (wc / nu1).round() as usize;
    if k_pole >= 1 {
        let distance = (wc - nu1 * k_pole as f64).abs();
        if distance < policy.pole_guard {
            return Err(Error::DegenerateCutoff { omega_c: wc, k: k_pole, distance });
        }
    }
    if omega == 0.0 {
        return Ok(0.0);
    }

    let wc2 = wc * wc;
    let w2 = omega * omega;
    let mut sum = 0.0;
    let mut small_run = 0;
    let mut k = 1;
    while k <= policy.k_max {
        let nu = nu1 * k as f64;
        let nu2 = nu * nu;
        let term = nu * omega / ((wc2 - nu2) * (w2 + nu2));
        sum += term;
        if nu > 2.0 * wc && term.abs() < policy.rel_tol * sum.abs() {
            small_run += 1;
            if small_run == 3 {
                break;
            }
        } else {
            small_run = 0;
        }
        k += 1;
    }
    let kf = k.min(policy.k_max) as f64;
    // Σ_{j>K} j⁻³ ≈ 1/(2K²) - 1/(2K³) + 1/(4K⁴)
    let tail = 0.5 / (kf * kf) - 0.5 / (kf * kf * kf) + 0.25 / (kf * kf * kf * kf);
    Ok(sum - omega / (nu1 * nu1 * nu1) * tail)
}

/// `W(ω)` for an ohmic–Drude bath.
pub fn w_function(omega: f64, bath: &BathSpec, policy: &MatsubaraPolicy) -> Result<Complex64> {
    let alpha = bath.alpha;
    let wc = bath.omega_c;
    let t = bath.temperature;
    let sum = matsubara_sum(omega, bath, policy)?;

    let re = PI * weighted_occupation(omega, bath);
    if omega == 0.0 {
        return Ok(Complex64::new(re, -0.5 * PI * alpha * wc));
    }
    let x = omega / wc;
    let drude = 1.0 / (1.0 + x * x);
    let cot = 1.0 / (0.5 * wc / t).tan();
    // G(ω)·ω_c/ω written without the 0/0 at small ω
    let im = -0.5 * PI * (spectral_density(omega, bath) * cot + alpha * wc * drude)
        + 2.0 * PI * alpha * wc * wc * t * sum;
    Ok(Complex64::new(re, im))
}

/// `W̄(ω) = ω W(ω)`. The zero-time correlator term drops out of the current
/// for a Hermitian steady state and is not included.
pub fn w_bar(omega: f64, bath: &BathSpec, policy: &MatsubaraPolicy) -> Result<Complex64> {
    if omega == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(w_function(omega, bath, policy)? * omega)
}

/// `W̄(ω)` with a finite stand-in `i·c` for the zero-time correlator term.
/// Only used to check numerically that this term does not reach the current.
pub fn w_bar_with_constant(
    omega: f64,
    bath: &BathSpec,
    policy: &MatsubaraPolicy,
    constant: f64,
) -> Result<Complex64> {
    Ok(w_bar(omega, bath, policy)? + Complex64::new(0.0, constant))
}

/// High-temperature approximation of `Im W(ω)` (valid for `ν₁ > |ω|`):
/// `α ω - π α ω T/ω_c - π α ω_c / 2`.
pub fn w_imag_high_t(omega: f64, bath: &BathSpec) -> f64 {
    let nu1 = 2.0 * PI * bath.temperature;
    if omega.abs() >= nu1 {
        log::warn!(
            "high-temperature Im W used outside its validity domain: |ω| = {} ≥ ν₁ = {}",
            omega.abs(),
            nu1
        );
    }
    let (alpha, wc) = (bath.alpha, bath.omega_c);
    alpha * omega - PI * alpha * omega * bath.temperature / wc - 0.5 * PI * alpha * wc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bath(alpha: f64, t: f64, wc: f64) -> BathSpec {
        BathSpec::new(BathSide::Right, alpha, t, wc).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn spectral_density_values() {
        let b = bath(0.01, 1.0, 5.0);
        assert_eq!(spectral_density(0.0, &b), 0.0);
        assert!(rel(spectral_density(5.0, &b), 0.01 * 5.0 / 2.0) < 1e-15);
        assert!(rel(spectral_density(1e-4, &b), 0.01 * 1e-4) < 1e-9);
        for w in [0.1, 0.7, 3.0, 12.0] {
            assert_eq!(spectral_density(-w, &b), -spectral_density(w, &b));
        }
    }

    #[test]
    fn bose_values_and_identity() {
        assert!(rel(bose_occupation(2f64.ln(), 1.0).unwrap(), 1.0) < 1e-15);
        assert_eq!(bose_occupation(1e4, 1.0).unwrap(), 0.0);
        assert_eq!(bose_occupation(0.0, 1.0), Err(Error::ZeroFrequency));
        for (w, t) in [(0.3, 0.25), (1.0, 1.0), (2.5, 0.7), (0.01, 2.0)] {
            let n = bose_occupation(w, t).unwrap();
            let nm = bose_occupation(-w, t).unwrap();
            assert!((nm + 1.0 + n).abs() <= 1e-14 * n.abs().max(1.0), "{w} {t}");
        }
    }

    #[test]
    fn w_at_zero_frequency() {
        let b = bath(0.02, 0.4, 5.0);
        let w = w_function(0.0, &b, &MatsubaraPolicy::default()).unwrap();
        assert!(rel(w.re, PI * 0.02 * 0.4) < 1e-15);
        assert!(rel(w.im, -0.5 * PI * 0.02 * 5.0) < 1e-15);
    }

    #[test]
    fn w_real_part_two_cases() {
        let b = bath(0.01, 0.3, 5.0);
        let p = MatsubaraPolicy::default();
        for w in [0.2, 1.0, 2.7] {
            let n = bose_occupation(w, 0.3).unwrap();
            let g = spectral_density(w, &b);
            assert!(rel(w_function(w, &b, &p).unwrap().re, PI * g * n) < 1e-13);
            assert!(rel(w_function(-w, &b, &p).unwrap().re, PI * g * (n + 1.0)) < 1e-13);
        }
    }

    #[test]
    fn w_is_continuous_at_zero() {
        let b = bath(0.01, 0.3, 5.0);
        let p = MatsubaraPolicy::default();
        let w0 = w_function(0.0, &b, &p).unwrap();
        for w in [1e-7, -1e-7] {
            let wv = w_function(w, &b, &p).unwrap();
            assert!((wv - w0).norm() < 1e-8);
        }
    }

    /// Reference values from an independent principal-value quadrature of
    /// `Im W(ω) = -P∫₀^∞ dx G(x) [(n(x)+1)/(ω+x) + n(x)/(ω-x)]`
    /// (adaptive Cauchy-weight quadrature, α = 0.01, ω_c = 5).
    #[test]
    fn w_imag_matches_quadrature() {
        let p = MatsubaraPolicy::default();
        let cases = [
            (0.25, 0.5, -0.06976802504716548),
            (1.0, -0.7, -0.07851301755195671),
            (0.3, 1.3, -0.059804759121405746),
            (0.25, 0.05, -0.07766919590774038),
            (1.0, 1.3, -0.07136103701048942),
        ];
        for (t, w, expected) in cases {
            let im = w_function(w, &bath(0.01, t, 5.0), &p).unwrap().im;
            assert!(rel(im, expected) < 1e-10, "T={t} ω={w}: {im} vs {expected}");
        }
    }

    #[test]
    fn kms_ratio() {
        let b = bath(0.03, 0.37, 5.0);
        for i in 1..=40 {
            let w = 0.1 * i as f64;
            let ratio = power_spectrum(w, &b) / power_spectrum(-w, &b);
            assert!(rel(ratio, (w / 0.37).exp()) < 1e-10, "ω = {w}");
        }
    }

    #[test]
    fn power_spectrum_values() {
        let b = bath(0.05, 0.6, 5.0);
        assert!(rel(power_spectrum(0.0, &b), 2.0 * PI * 0.05 * 0.6) < 1e-15);
        for w in [0.1, 1.0, 4.0] {
            let diff = power_spectrum(w, &b) - power_spectrum(-w, &b);
            assert!(rel(diff, 2.0 * PI * spectral_density(w, &b)) < 1e-12);
            assert!(power_spectrum(w, &b) > 0.0 && power_spectrum(-w, &b) > 0.0);
        }
    }

    #[test]
    fn w_bar_consistency() {
        let b = bath(0.01, 0.25, 5.0);
        let p = MatsubaraPolicy::default();
        assert_eq!(w_bar(0.0, &b, &p).unwrap(), Complex64::new(0.0, 0.0));
        for w in [-1.2, 0.4, 2.0] {
            let wb = w_bar(w, &b, &p).unwrap();
            assert!(rel(wb.re, w * w_function(w, &b, &p).unwrap().re) < 1e-15);
        }
    }

    #[test]
    fn high_t_imag_part() {
        let b = bath(0.01, 1.0, 5.0);
        assert!(rel(w_imag_high_t(0.0, &b), -0.5 * PI * 0.01 * 5.0) < 1e-15);
        let exact = w_function(0.5, &b, &MatsubaraPolicy::default()).unwrap().im;
        assert!(rel(w_imag_high_t(0.5, &b), exact) < 0.05);
        let even = w_imag_high_t(0.0, &b);
        for w in [0.1, 0.3] {
            let odd_p = w_imag_high_t(w, &b) - even;
            let odd_m = w_imag_high_t(-w, &b) - even;
            assert!((odd_p + odd_m).abs() < 1e-16);
        }
    }

    #[test]
    fn degenerate_cutoff_is_reported() {
        // β ω_c = 2π ⇒ ω_c = ν₁
        let t = 5.0 / (2.0 * PI);
        let b = bath(0.01, t, 5.0);
        let err = w_function(0.3, &b, &MatsubaraPolicy::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateCutoff { k: 1, .. }));
        let shifted = bath(0.01, t, 5.0 + 1e-6);
        assert!(w_function(0.3, &shifted, &MatsubaraPolicy::default()).is_ok());
    }

    #[test]
    fn matsubara_truncation_estimate() {
        let b = bath(0.01, 0.25, 5.0);
        let p = MatsubaraPolicy::default();
        let w = 0.8;
        let s = matsubara_sum(w, &b, &p).unwrap();
        // first omitted term at the stopping index is below rel_tol of the sum
        let nu1 = 2.0 * PI * 0.25;
        let mut k = 1usize;
        let mut acc = 0.0;
        let mut run = 0;
        loop {
            let nu = nu1 * k as f64;
            let term = nu * w / ((25.0 - nu * nu) * (w * w + nu * nu));
            acc += term;
            if nu > 10.0 && term.abs() < 1e-12 * acc.abs() {
                run += 1;
                if run == 3 {
                    break;
                }
            } else {
                run = 0;
            }
            k += 1;
        }
        let nu = nu1 * (k + 1) as f64;
        let next = nu * w / ((25.0 - nu * nu) * (w * w + nu * nu));
        assert!(next.abs() / s.abs() < p.rel_tol);
    }

    #[test]
    fn policy_validation() {
        assert!(MatsubaraPolicy::default().validate().is_ok());
        assert!(MatsubaraPolicy { rel_tol: 1e-5, ..Default::default() }.validate().is_err());
        assert!(MatsubaraPolicy { k_max: 100, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn bath_validation() {
        assert!(BathSpec::new(BathSide::Left, -1.0, 1.0, 5.0).is_err());
        assert!(BathSpec::new(BathSide::Left, 0.1, 0.0, 5.0).is_err());
        assert!(BathSpec::new(BathSide::Left, 0.1, 1.0, 0.0).is_err());
        let l = BathSpec::new(BathSide::Left, 0.1, 1.0, 5.0).unwrap();
        let r = BathSpec::new(BathSide::Right, 0.1, 1.0, 5.0).unwrap();
        assert!(BathPair::new(r, l).is_err());
        assert!(BathPair::new(l, r).is_ok());
        assert!(rel(l.renormalization(), PI * 0.1 * 5.0 / 2.0) < 1e-15);
    }
}
