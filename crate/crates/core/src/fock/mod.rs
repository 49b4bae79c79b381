//! Truncated Fock-basis simulator for continuous-variable circuits.
//!
//! States are pure and stored as a dense amplitude vector over `cutoff^modes`
//! basis kets. The multi-index `(n_0, .., n_{M-1})` maps to the flat position
//! `n_0 * D^{M-1} + .. + n_{M-1}`, so mode 0 is the most significant digit.
//!
//! Gates are the restriction of the ideal (infinite-dimensional) operator to
//! the first `cutoff` photon numbers. Displacement and squeezing are built as
//! normal-ordered products of exponentials of truncated ladder-operator
//! generators; beamsplitters are exponentiated one photon-number block at a
//! time. In both cases the retained matrix elements are exact, and the only
//! effect of the cutoff is amplitude leaking out of the simulated space, which
//! shows up as squared-norm loss on the state.
//!
//! Quadratures use the `hbar = 2` convention by default: `X = a + a^dagger`,
//! `P = -i (a - a^dagger)`.

mod dump;
mod expm;
mod gates;
mod selftest;
mod state;

pub use dump::{format_matrix, parse_matrix};
pub use expm::{annihilation_matrix, matrix_exponential, CMatrix};
pub use gates::{
    beamsplitter_gate, beamsplitter_with_derivatives, displacement_gate,
    displacement_with_derivative, kerr_gate, rotation_gate, squeezing_gate,
    squeezing_with_derivative, Arity, GateMatrix,
};
pub use selftest::{
    coherent_amplitude, commutator_defect, gates_selftest, squeezed_vacuum_amplitude, SelfTestCheck,
};
pub use state::{apply_gate, quadrature_expectation, FockState, Modes};

pub(crate) use state::{apply_matrix, quadrature_apply, Transpose};

use crate::error::{Error, Result};

/// Default bound on displacement magnitudes.
pub const DEFAULT_DISPLACEMENT_LIMIT: f64 = 4.0;
/// Default bound on squeezing magnitudes.
pub const DEFAULT_SQUEEZING_LIMIT: f64 = 1.5;

/// Size of the simulated space and the conventions used on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub modes: usize,
    /// Number of Fock levels kept per mode (maximum photon number + 1).
    pub cutoff: usize,
    /// Quadratures are `sqrt(hbar / 2) * (a + a^dagger)` and so on.
    pub hbar: f64,
    pub displacement_limit: f64,
    pub squeezing_limit: f64,
}

impl SimConfig {
    pub fn new(modes: usize, cutoff: usize) -> Result<Self> {
        let cfg = SimConfig {
            modes,
            cutoff,
            hbar: 2.0,
            displacement_limit: DEFAULT_DISPLACEMENT_LIMIT,
            squeezing_limit: DEFAULT_SQUEEZING_LIMIT,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes < 1 {
            return Err(Error::InvalidConfig("at least one mode is required".into()));
        }
        if self.cutoff < 2 {
            return Err(Error::InvalidConfig(format!(
                "cutoff must be at least 2, got {}",
                self.cutoff
            )));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidConfig(format!("hbar must be positive, got {}", self.hbar)));
        }
        if self.cutoff.checked_pow(self.modes as u32).is_none() {
            return Err(Error::InvalidConfig("Hilbert space dimension overflows".into()));
        }
        Ok(())
    }

    /// Hilbert-space dimension `cutoff^modes`.
    pub fn dim(&self) -> usize {
        self.cutoff.pow(self.modes as u32)
    }

    /// Prefactor `c` in `X = c (a + a^dagger)`.
    pub fn quadrature_scale(&self) -> f64 {
        (self.hbar / 2.0).sqrt()
    }
}
