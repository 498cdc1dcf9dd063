//! Steady-state heat transport through a qubit–resonator junction.
//!
//! The junction is a flux qubit coupled to a single resonator mode (quantum
//! Rabi model). The resonator couples to a left bath through `a + a†`, the
//! qubit to a right bath through `σ_z`. Both baths are ohmic with a Drude
//! cutoff. Steady states are computed from the second-order Redfield
//! equation, either in the full secular form (populations only) or keeping
//! coherences between quasi-degenerate levels.
//!
//! Units: `ħ = k_B = 1` and `ω_r = 1`. Frequencies are in units of `ω_r`,
//! temperatures in `ħω_r/k_B`.
//!
//! Module map:
//! - [`hilbert`]: Hamiltonian, coupling operators, diagonalization.
//! - [`baths`]: spectral density, Bose factors, correlation transforms `W`.
//! - [`master_equation`]: Redfield tensor, rates, steady-state solvers.
//! - [`transport`]: currents, rectification, conductance, sweeps.
//! - [`approx`]: analytic limits (GRWA, RWA, two- and three-level forms).
//! - [`cli`]: configuration, presets, run orchestration and output.

pub mod approx;
pub mod baths;
pub mod cli;
pub mod error;
pub mod hilbert;
pub mod master_equation;
pub mod transport;

pub use error::{Error, Result};
