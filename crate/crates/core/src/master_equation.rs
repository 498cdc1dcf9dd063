//! Second-order Redfield equation in the junction eigenbasis and its
//! steady states.
//!
//! ```text
//! 0 = -i ω_nm ρ_nm + Σ_{n'm'} K_{nmn'm'} ρ_{n'm'}
//!
//! K_{nmn'm'} = Σ_l { Q_{m'm} Q_{nn'} [W_{nm'} + W*_{mn'}]
//!                    - Σ_k [ Q_{kn} Q_{kn'} W_{km'} δ_{m'm} + Q_{km'} Q_{km} W*_{kn'} δ_{n'n} ] }
//! ```
//!
//! with real symmetric `Q_l` and `W_{nm} = W_l(ω_nm)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::baths::{power_spectrum, w_function, BathPair, BathSide, BathSpec, MatsubaraPolicy};
use crate::error::{Error, Result};
use crate::hilbert::EigenSystem;

/// Condition number above which the direct solve falls back to least squares.
pub const CONDITION_LIMIT: f64 = 1e12;

/// `W_l(ω_nm)` for every ordered level pair of one bath.
#[derive(Debug, Clone)]
pub struct Correlations {
    pub side: BathSide,
    pub w: DMatrix<Complex64>,
}

impl Correlations {
    pub fn new(eigsys: &EigenSystem, bath: &BathSpec, policy: &MatsubaraPolicy) -> Result<Self> {
        let n = eigsys.n_levels();
        let mut w = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for a in 0..n {
            for b in 0..n {
                w[(a, b)] = w_function(eigsys.bohr(a, b), bath, policy)?;
            }
        }
        Ok(Self { side: bath.side, w })
    }
}

/// Redfield tensor of both baths, evaluated on demand from cached `W` tables.
#[derive(Debug, Clone)]
pub struct RedfieldTensor<'a> {
    eigsys: &'a EigenSystem,
    baths: [Correlations; 2],
}

impl<'a> RedfieldTensor<'a> {
    pub fn new(eigsys: &'a EigenSystem, baths: &BathPair, policy: &MatsubaraPolicy) -> Result<Self> {
        Ok(Self {
            eigsys,
            baths: [
                Correlations::new(eigsys, &baths.left, policy)?,
                Correlations::new(eigsys, &baths.right, policy)?,
            ],
        })
    }

    pub fn eigsys(&self) -> &EigenSystem {
        self.eigsys
    }

    pub fn correlations(&self, side: BathSide) -> &Correlations {
        match side {
            BathSide::Left => &self.baths[0],
            BathSide::Right => &self.baths[1],
        }
    }

    /// Contribution of a single bath to `K_{nmn'm'}`.
    pub fn element_for(&self, side: BathSide, n: usize, m: usize, np: usize, mp: usize) -> Complex64 {
        let q = self.eigsys.q(side);
        let w = &self.correlations(side).w;
        let mut k = (w[(n, mp)] + w[(m, np)].conj()) * (q[(mp, m)] * q[(n, np)]);
        let dim = self.eigsys.n_levels();
        if mp == m {
            for j in 0..dim {
                k -= w[(j, mp)] * (q[(j, n)] * q[(j, np)]);
            }
        }
        if np == n {
            for j in 0..dim {
                k -= w[(j, np)].conj() * (q[(j, mp)] * q[(j, m)]);
            }
        }
        k
    }

    pub fn element(&self, n: usize, m: usize, np: usize, mp: usize) -> Complex64 {
        self.element_for(BathSide::Left, n, m, np, mp) + self.element_for(BathSide::Right, n, m, np, mp)
    }
}

/// Single Redfield tensor element. Builds the `W` tables on every call; use
/// [`RedfieldTensor`] when more than one element is needed.
pub fn redfield_element(
    n: usize,
    m: usize,
    np: usize,
    mp: usize,
    eigsys: &EigenSystem,
    baths: &BathPair,
    policy: &MatsubaraPolicy,
) -> Result<Complex64> {
    let dim = eigsys.n_levels();
    if [n, m, np, mp].iter().any(|&i| i >= dim) {
        return Err(Error::invalid("index", format!("level index out of range (n_levels = {dim})")));
    }
    Ok(RedfieldTensor::new(eigsys, baths, policy)?.element(n, m, np, mp))
}

/// Golden-rule rates; `gamma[(n, m)]` is the rate `m → n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
    pub total: DMatrix<f64>,
}

impl RateMatrix {
    pub fn bath(&self, side: BathSide) -> &DMatrix<f64> {
        match side {
            BathSide::Left => &self.left,
            BathSide::Right => &self.right,
        }
    }
}

fn bath_rates(eigsys: &EigenSystem, bath: &BathSpec) -> DMatrix<f64> {
    let n = eigsys.n_levels();
    let q = eigsys.q(bath.side);
    let mut g = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            if a != b {
                g[(a, b)] = q[(a, b)] * q[(a, b)] * power_spectrum(eigsys.bohr(b, a), bath);
            }
        }
    }
    for b in 0..n {
        let out: f64 = (0..n).filter(|&a| a != b).map(|a| g[(a, b)]).sum();
        g[(b, b)] = -out;
    }
    g
}

/// `Γˡ_nm = |Q_l,nm|² S_l(ω_mn)` for `n ≠ m`, diagonal from probability
/// conservation.
pub fn golden_rule_rates(eigsys: &EigenSystem, baths: &BathPair) -> RateMatrix {
    let left = bath_rates(eigsys, &baths.left);
    let right = bath_rates(eigsys, &baths.right);
    let total = &left + &right;
    RateMatrix { left, right, total }
}

/// Index pairs `(n, m)`, `n < m`, whose coherences are kept.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoherentPairSet {
    pub pairs: Vec<(usize, usize)>,
}

impl CoherentPairSet {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }
}

/// All pairs with `0 < |ω_nm| < threshold`.
pub fn select_coherent_pairs(eigsys: &EigenSystem, threshold: f64) -> Result<CoherentPairSet> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid("coherence_threshold", "must be >= 0"));
    }
    let n = eigsys.n_levels();
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let w = eigsys.bohr(a, b).abs();
            if w > 0.0 && w < threshold {
                pairs.push((a, b));
            }
        }
    }
    Ok(CoherentPairSet { pairs })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveDiagnostics {
    pub condition_number: f64,
    /// Max-norm residual of the linear system actually solved.
    pub residual: f64,
    pub least_squares: bool,
}

/// Steady-state reduced density matrix restricted to the retained entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub populations: Vec<f64>,
    pub pairs: CoherentPairSet,
    /// `ρ_nm` for each `(n, m)` in `pairs`; `ρ_mn` is its conjugate.
    pub coherences: Vec<Complex64>,
    pub diagnostics: SolveDiagnostics,
}

/// Populations below this are treated as a positivity violation.
pub const POSITIVITY_TOL: f64 = 1e-10;

impl SteadyState {
    pub fn n_levels(&self) -> usize {
        self.populations.len()
    }

    pub fn trace(&self) -> f64 {
        self.populations.iter().sum()
    }

    pub fn min_population(&self) -> f64 {
        self.populations.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn rho(&self, n: usize, m: usize) -> Complex64 {
        if n == m {
            return Complex64::new(self.populations[n], 0.0);
        }
        for (&(a, b), &c) in self.pairs.pairs.iter().zip(&self.coherences) {
            if (a, b) == (n, m) {
                return c;
            }
            if (b, a) == (n, m) {
                return c.conj();
            }
        }
        Complex64::new(0.0, 0.0)
    }

    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        let n = self.n_levels();
        DMatrix::from_fn(n, n, |a, b| self.rho(a, b))
    }

    /// Smallest eigenvalue of the (Hermitian) density matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        if self.pairs.is_empty() {
            return self.min_population();
        }
        self.density_matrix().symmetric_eigenvalues().min()
    }

    /// Nonzero entries `(n, m, ρ_nm)`, both orderings of each pair.
    pub fn entries(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out: Vec<_> =
            self.populations.iter().enumerate().map(|(i, &p)| (i, i, Complex64::new(p, 0.0))).collect();
        for (&(a, b), &c) in self.pairs.pairs.iter().zip(&self.coherences) {
            out.push((a, b, c));
            out.push((b, a, c.conj()));
        }
        out
    }
}

/// Levels not reachable from the ground level through nonzero rates.
fn disconnected_levels(rates: &DMatrix<f64>) -> Vec<usize> {
    let n = rates.nrows();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for b in 0..n {
            if !seen[b] && (rates[(a, b)] > 0.0 || rates[(b, a)] > 0.0) {
                seen[b] = true;
                stack.push(b);
            }
        }
    }
    (0..n).filter(|&i| !seen[i]).collect()
}

/// Solves `A x = b` directly, or by least squares when `A` is too badly
/// conditioned.
fn solve_dense(a: DMatrix<f64>, b: DVector<f64>) -> Result<(DVector<f64>, SolveDiagnostics)> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || !smax.is_finite() {
        return Err(Error::Singular("zero or non-finite system matrix".into()));
    }
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let (x, least_squares) = if condition_number <= CONDITION_LIMIT {
        let x = a
            .clone()
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Singular("LU factorization failed".into()))?;
        (x, false)
    } else {
        let x = svd
            .solve(&b, smax * f64::EPSILON * a.nrows() as f64)
            .map_err(|e| Error::Singular(e.to_string()))?;
        (x, true)
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("non-finite solution".into()));
    }
    let residual = (&a * &x - &b).amax();
    Ok((x, SolveDiagnostics { condition_number, residual, least_squares }))
}

/// Full secular steady state: `Σ_m Γ_nm ρ_mm = 0`, `Σ ρ = 1`.
pub fn fsme_steady_state(rates: &RateMatrix) -> Result<SteadyState> {
    let g = &rates.total;
    let n = g.nrows();
    let missing = disconnected_levels(g);
    if !missing.is_empty() {
        return Err(Error::Reducible { levels: missing });
    }
    let mut a = g.clone();
    for c in 0..n {
        a[(0, c)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[0] = 1.0;
    let (x, diagnostics) = solve_dense(a, b)?;
    Ok(SteadyState {
        populations: x.iter().copied().collect(),
        pairs: CoherentPairSet::default(),
        coherences: Vec::new(),
        diagnostics,
    })
}

/// Partial secular steady state: populations coupled to the coherences in
/// `pairs`; every other coherence is zero.
///
/// Every tensor element whose row and column both belong to the retained
/// index set (diagonal plus `pairs` in both orders) enters the system.
pub fn psme_steady_state(
    eigsys: &EigenSystem,
    baths: &BathPair,
    pairs: &CoherentPairSet,
    policy: &MatsubaraPolicy,
) -> Result<SteadyState> {
    let tensor = RedfieldTensor::new(eigsys, baths, policy)?;
    psme_with_tensor(&tensor, pairs)
}

pub fn psme_with_tensor(tensor: &RedfieldTensor<'_>, pairs: &CoherentPairSet) -> Result<SteadyState> {
    let eigsys = tensor.eigsys();
    let n = eigsys.n_levels();
    for &(a, b) in &pairs.pairs {
        if a >= b || b >= n {
            return Err(Error::invalid("pairs", format!("invalid coherent pair ({a}, {b})")));
        }
    }
    if pairs.is_empty() {
        let missing = disconnected_levels(&golden_rule_from_tensor(tensor));
        if !missing.is_empty() {
            return Err(Error::Reducible { levels: missing });
        }
    }
    let p = pairs.len();
    let dim = n + 2 * p;

    // complex coefficient of each real unknown in the row (r, c) of K ρ
    let row = |r: usize, c: usize| -> Vec<Complex64> {
        let mut coeff = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..n {
            coeff[j] = tensor.element(r, c, j, j);
        }
        for (i, &(a, b)) in pairs.pairs.iter().enumerate() {
            let k_ab = tensor.element(r, c, a, b);
            let k_ba = tensor.element(r, c, b, a);
            // ρ_ab = x + i y, ρ_ba = x - i y
            coeff[n + 2 * i] = k_ab + k_ba;
            coeff[n + 2 * i + 1] = (k_ab - k_ba) * Complex64::new(0.0, 1.0);
        }
        if r != c {
            let idx = pairs.pairs.iter().position(|&pq| pq == (r, c)).expect("retained pair");
            let w = eigsys.bohr(r, c);
            coeff[n + 2 * idx] += Complex64::new(0.0, -w);
            coeff[n + 2 * idx + 1] += Complex64::new(w, 0.0);
        }
        coeff
    };

    let mut a = DMatrix::zeros(dim, dim);
    let mut b = DVector::zeros(dim);
    for r in 0..n {
        let coeff = row(r, r);
        for c in 0..dim {
            a[(r, c)] = coeff[c].re;
        }
    }
    for (i, &(ra, rb)) in pairs.pairs.iter().enumerate() {
        let coeff = row(ra, rb);
        for c in 0..dim {
            a[(n + 2 * i, c)] = coeff[c].re;
            a[(n + 2 * i + 1, c)] = coeff[c].im;
        }
    }
    for c in 0..dim {
        a[(0, c)] = if c < n { 1.0 } else { 0.0 };
    }
    b[0] = 1.0;

    let (x, diagnostics) = solve_dense(a, b)?;
    let coherences =
        (0..p).map(|i| Complex64::new(x[n + 2 * i], x[n + 2 * i + 1])).collect::<Vec<_>>();
    Ok(SteadyState {
        populations: x.iter().take(n).copied().collect(),
        pairs: pairs.clone(),
        coherences,
        diagnostics,
    })
}

fn golden_rule_from_tensor(tensor: &RedfieldTensor<'_>) -> DMatrix<f64> {
    let n = tensor.eigsys().n_levels();
    DMatrix::from_fn(n, n, |a, b| if a == b { 0.0 } else { tensor.element(a, a, b, b).re })
}

/// Max-norm residual of `-i ω_nm ρ_nm + Σ K ρ` over the retained rows,
/// including the conjugate coherence rows and the population row replaced
/// by the trace condition.
pub fn redfield_residual(tensor: &RedfieldTensor<'_>, state: &SteadyState) -> f64 {
    let eigsys = tensor.eigsys();
    let entries = state.entries();
    let mut worst: f64 = 0.0;
    for &(r, c, rho_rc) in &entries {
        let mut v = Complex64::new(0.0, -eigsys.bohr(r, c)) * rho_rc;
        for &(np, mp, rho) in &entries {
            v += tensor.element(r, c, np, mp) * rho;
        }
        worst = worst.max(v.norm());
    }
    worst
}
