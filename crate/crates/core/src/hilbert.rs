//! Truncated qubit ⊗ Fock Hilbert space of the quantum Rabi junction.
//!
//! Product basis index: `s * n_fock + j`, with `s = 0` the `σ_z = +1`
//! persistent-current state, `s = 1` the `σ_z = -1` state and `j` the
//! photon number.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::baths::BathPair;
use crate::error::{Error, Result};

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionParams {
    /// Qubit tunnelling splitting Δ.
    pub delta: f64,
    /// Qubit bias ε.
    #[serde(default)]
    pub epsilon: f64,
    /// Resonator frequency; fixed to 1 in internal units.
    #[serde(default = "unit")]
    pub omega_r: f64,
    /// Qubit–resonator coupling g.
    pub g: f64,
}

fn unit() -> f64 {
    1.0
}

impl JunctionParams {
    pub fn new(delta: f64, epsilon: f64, g: f64) -> Result<Self> {
        let p = Self { delta, epsilon, omega_r: 1.0, g };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("delta", "must be finite and >= 0"));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::invalid("epsilon", "must be finite"));
        }
        if !(self.omega_r > 0.0 && self.omega_r.is_finite()) {
            return Err(Error::invalid("omega_r", "must be finite and > 0"));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::invalid("g", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// ω_q = √(Δ² + ε²).
    pub fn qubit_frequency(&self) -> f64 {
        self.delta.hypot(self.epsilon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(default = "default_n_fock")]
    pub n_fock: usize,
    #[serde(default = "default_n_levels")]
    pub n_levels: usize,
}

fn default_n_fock() -> usize {
    20
}

fn default_n_levels() -> usize {
    5
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self { n_fock: default_n_fock(), n_levels: default_n_levels() }
    }
}

impl TruncationConfig {
    pub fn new(n_fock: usize, n_levels: usize) -> Result<Self> {
        let t = Self { n_fock, n_levels };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_levels < 2 {
            return Err(Error::invalid("n_levels", "must be at least 2"));
        }
        if self.n_fock < self.n_levels {
            return Err(Error::invalid("n_fock", "must be at least n_levels"));
        }
        Ok(())
    }

    /// The truncation used to test convergence.
    pub fn enlarged(&self) -> Self {
        Self { n_fock: self.n_fock + 5, n_levels: self.n_levels + 2 }
    }
}

/// Bath coupling operators in the product basis, together with their exact
/// squares (the squares are not the product of the truncated matrices: the
/// last Fock state of `(a + a†)²` differs).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingOperators {
    pub q_left: DMatrix<f64>,
    pub q_right: DMatrix<f64>,
    pub q_left_sq: DMatrix<f64>,
    pub q_right_sq: DMatrix<f64>,
}

/// Energies and coupling operators in the junction eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub omega: Vec<f64>,
    pub q_left: DMatrix<f64>,
    pub q_right: DMatrix<f64>,
}

impl EigenSystem {
    /// Builds an eigensystem from explicit data (analytic spectra, test
    /// doubles). Checks ordering, shapes and symmetry.
    pub fn new(omega: Vec<f64>, q_left: DMatrix<f64>, q_right: DMatrix<f64>) -> Result<Self> {
        let n = omega.len();
        if n < 2 {
            return Err(Error::invalid("omega", "need at least two levels"));
        }
        if omega.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("omega", "eigenfrequencies must be non-decreasing"));
        }
        for (name, q) in [("q_left", &q_left), ("q_right", &q_right)] {
            if q.nrows() != n || q.ncols() != n {
                return Err(Error::invalid(name, format!("expected {n}x{n} matrix")));
            }
            if (q - q.transpose()).amax() > 1e-12 {
                return Err(Error::invalid(name, "must be symmetric"));
            }
        }
        Ok(Self { omega, q_left, q_right })
    }

    pub fn n_levels(&self) -> usize {
        self.omega.len()
    }

    /// Bohr frequency ω_nm = ω_n − ω_m.
    pub fn bohr(&self, n: usize, m: usize) -> f64 {
        self.omega[n] - self.omega[m]
    }

    pub fn q(&self, side: crate::baths::BathSide) -> &DMatrix<f64> {
        match side {
            crate::baths::BathSide::Left => &self.q_left,
            crate::baths::BathSide::Right => &self.q_right,
        }
    }

    /// Keeps the lowest `n_levels` levels.
    pub fn truncated(&self, n_levels: usize) -> Result<Self> {
        if n_levels < 2 || n_levels > self.n_levels() {
            return Err(Error::invalid("n_levels", "out of range for this eigensystem"));
        }
        Ok(Self {
            omega: self.omega[..n_levels].to_vec(),
            q_left: self.q_left.view((0, 0), (n_levels, n_levels)).into_owned(),
            q_right: self.q_right.view((0, 0), (n_levels, n_levels)).into_owned(),
        })
    }
}

fn check_n_fock(n_fock: usize) -> Result<()> {
    if n_fock < 2 {
        return Err(Error::invalid("n_fock", "must be at least 2"));
    }
    Ok(())
}

/// `H/ħ = -(ε σ_z + Δ σ_x)/2 + ω_r a†a + g σ_z (a† + a)` in the product basis.
pub fn build_rabi_hamiltonian(params: &JunctionParams, n_fock: usize) -> Result<DMatrix<f64>> {
    params.validate()?;
    check_n_fock(n_fock)?;
    let dim = 2 * n_fock;
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..2 {
        let sz = if s == 0 { 1.0 } else { -1.0 };
        let off = s * n_fock;
        for j in 0..n_fock {
            h[(off + j, off + j)] = -0.5 * params.epsilon * sz + params.omega_r * j as f64;
            if j + 1 < n_fock {
                let c = params.g * sz * ((j + 1) as f64).sqrt();
                h[(off + j, off + j + 1)] = c;
                h[(off + j + 1, off + j)] = c;
            }
        }
    }
    for j in 0..n_fock {
        h[(j, n_fock + j)] = -0.5 * params.delta;
        h[(n_fock + j, j)] = -0.5 * params.delta;
    }
    Ok(h)
}

/// `Q_L = a + a†` and `Q_R = σ_z` in the product basis.
pub fn build_coupling_operators(n_fock: usize) -> Result<CouplingOperators> {
    check_n_fock(n_fock)?;
    let dim = 2 * n_fock;
    let mut q_left = DMatrix::zeros(dim, dim);
    let mut q_left_sq = DMatrix::zeros(dim, dim);
    let mut q_right = DMatrix::zeros(dim, dim);
    for s in 0..2 {
        let off = s * n_fock;
        for j in 0..n_fock {
            q_right[(off + j, off + j)] = if s == 0 { 1.0 } else { -1.0 };
            // (a + a†)² = 2a†a + 1 + a² + a†²
            q_left_sq[(off + j, off + j)] = 2.0 * j as f64 + 1.0;
            if j + 1 < n_fock {
                let c = ((j + 1) as f64).sqrt();
                q_left[(off + j, off + j + 1)] = c;
                q_left[(off + j + 1, off + j)] = c;
            }
            if j + 2 < n_fock {
                let c = (((j + 1) * (j + 2)) as f64).sqrt();
                q_left_sq[(off + j, off + j + 2)] = c;
                q_left_sq[(off + j + 2, off + j)] = c;
            }
        }
    }
    let q_right_sq = DMatrix::identity(dim, dim);
    Ok(CouplingOperators { q_left, q_right, q_left_sq, q_right_sq })
}

/// `H + Σ_l μ_l Q_l²` with `μ_l = (π/2) α_l ω_c,l`.
///
/// `Q_R² = 1`, so the right-bath term only shifts the spectrum.
pub fn apply_bath_renormalization(
    h: &DMatrix<f64>,
    ops: &CouplingOperators,
    baths: &BathPair,
) -> DMatrix<f64> {
    h + &ops.q_left_sq * baths.left.renormalization()
        + &ops.q_right_sq * baths.right.renormalization()
}

/// Diagonalizes `h` and rotates the coupling operators into its eigenbasis,
/// keeping the lowest `trunc.n_levels` states.
///
/// Eigenvalues are sorted ascending. Inside a degenerate cluster the basis is
/// fixed by diagonalizing `Q_R` restricted to the cluster. Each eigenvector
/// is signed so that its first component of largest magnitude is positive.
pub fn diagonalize(
    h: &DMatrix<f64>,
    ops: &CouplingOperators,
    trunc: &TruncationConfig,
) -> Result<EigenSystem> {
    trunc.validate()?;
    let dim = h.nrows();
    if h.ncols() != dim {
        return Err(Error::Eigensolver("matrix is not square".into()));
    }
    if trunc.n_levels > dim {
        return Err(Error::invalid("n_levels", "exceeds Hilbert-space dimension"));
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigensolver("matrix has non-finite entries".into()));
    }
    if (h - h.transpose()).amax() > 1e-12 * h.amax().max(1.0) {
        return Err(Error::Eigensolver("matrix is not symmetric".into()));
    }

    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigensolver("symmetric QR iteration did not converge".into()))?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);

    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && values[end] - values[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            resolve_cluster(&mut vectors, start, end, &ops.q_right);
        }
        start = end;
    }

    for c in 0..dim {
        fix_phase(&mut vectors.column_mut(c));
    }

    let n = trunc.n_levels;
    let basis = vectors.columns(0, n);
    let rotate = |q: &DMatrix<f64>| {
        let m = basis.transpose() * q * basis;
        (&m + m.transpose()) * 0.5
    };
    Ok(EigenSystem { omega: values[..n].to_vec(), q_left: rotate(&ops.q_left), q_right: rotate(&ops.q_right) })
}

fn resolve_cluster(vectors: &mut DMatrix<f64>, start: usize, end: usize, q: &DMatrix<f64>) {
    let block = vectors.columns(start, end - start).into_owned();
    let m = block.transpose() * q * &block;
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..end - start).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let u = DMatrix::from_fn(end - start, end - start, |r, c| eig.eigenvectors[(r, order[c])]);
    let rotated = block * u;
    vectors.columns_mut(start, end - start).copy_from(&rotated);
}

fn fix_phase(v: &mut nalgebra::DVectorViewMut<'_, f64>) {
    let max = v.amax();
    let tie = 1e-12 * max;
    if let Some(lead) = v.iter().position(|x| x.abs() >= max - tie) {
        if v[lead] < 0.0 {
            v.neg_mut();
        }
    }
}

/// Options controlling how the junction Hamiltonian is assembled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianOptions {
    pub truncation: TruncationConfig,
    /// Add the bath-induced `μ_l Q_l²` terms.
    pub renormalize: bool,
}

/// Builds, renormalizes (optionally) and diagonalizes the junction.
pub fn junction_eigensystem(
    params: &JunctionParams,
    baths: &BathPair,
    options: &HamiltonianOptions,
) -> Result<EigenSystem> {
    let n_fock = options.truncation.n_fock;
    let h = build_rabi_hamiltonian(params, n_fock)?;
    let ops = build_coupling_operators(n_fock)?;
    let h = if options.renormalize { apply_bath_renormalization(&h, &ops, baths) } else { h };
    diagonalize(&h, &ops, &options.truncation)
}

/// Relative change tolerated between a truncation and its enlargement.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Evaluates `observable` at `trunc` and at [`TruncationConfig::enlarged`]
/// and reports whether the relative change is below [`CONVERGENCE_TOL`].
pub fn check_truncation_convergence<F>(trunc: &TruncationConfig, observable: F) -> Result<bool>
where
    F: Fn(&TruncationConfig) -> Result<f64>,
{
    let base = observable(trunc)?;
    let larger = observable(&trunc.enlarged())?;
    Ok(relative_change_converged(base, larger))
}

pub(crate) fn relative_change_converged(base: f64, larger: f64) -> bool {
    let scale = base.abs().max(larger.abs());
    // both values at the round-off floor count as converged
    scale < 1e-300 || (base - larger).abs() <= CONVERGENCE_TOL * scale
}

/// Lowest eigenvalue; used for truncation diagnostics.
pub fn ground_energy(h: &DMatrix<f64>) -> f64 {
    let eig: DVector<f64> = h.symmetric_eigenvalues();
    eig.min()
}
