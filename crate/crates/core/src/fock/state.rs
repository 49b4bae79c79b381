use num_complex::Complex64;

use super::expm::CMatrix;
use super::gates::{Arity, GateMatrix};
use super::SimConfig;
use crate::error::{Error, Result};

/// Modes a gate acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modes {
    Single(usize),
    /// `(a, b)`: the gate's first factor acts on `a`.
    Pair(usize, usize),
}

/// Pure state over `cutoff^modes` Fock kets. Not renormalized between gates.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amplitudes: Vec<Complex64>,
    config: SimConfig,
}

impl FockState {
    pub fn vacuum(config: SimConfig) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); config.dim()];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        FockState { amplitudes, config }
    }

    pub fn from_amplitudes(config: SimConfig, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != config.dim() {
            return Err(Error::Shape(format!(
                "expected {} amplitudes, got {}",
                config.dim(),
                amplitudes.len()
            )));
        }
        Ok(FockState { amplitudes, config })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// Amplitude of the ket with the given occupation numbers.
    pub fn amplitude(&self, occupation: &[usize]) -> Complex64 {
        let d = self.config.cutoff;
        let idx = occupation.iter().fold(0, |acc, &n| acc * d + n);
        self.amplitudes[idx]
    }

    /// `<psi|psi>`; falls below one as amplitude leaks past the cutoff.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Purity `Tr[rho^2]` of the unnormalized density `|psi><psi|`.
    pub fn purity(&self) -> f64 {
        self.norm_sqr().powi(2)
    }

    /// Normalized mean photon number of one mode.
    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        self.check_mode(mode)?;
        let norm = self.nonzero_norm()?;
        let d = self.config.cutoff;
        let stride = d.pow((self.config.modes - 1 - mode) as u32);
        let total: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, z)| ((i / stride) % d) as f64 * z.norm_sqr())
            .sum();
        Ok(total / norm)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.config.modes {
            return Err(Error::Shape(format!(
                "mode {mode} out of range for {} modes",
                self.config.modes
            )));
        }
        Ok(())
    }

    fn nonzero_norm(&self) -> Result<f64> {
        let norm = self.norm_sqr();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NumericalDegeneracy(format!(
                "state has squared norm {norm}"
            )));
        }
        Ok(norm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Transpose {
    None,
    /// Apply the conjugate transpose instead.
    Adjoint,
}

/// Applies `gate` to the listed modes of `state`, identity elsewhere.
pub fn apply_gate(state: &FockState, gate: &GateMatrix, modes: Modes) -> Result<FockState> {
    let cfg = state.config;
    let expected = match (gate.arity, modes) {
        (Arity::One, Modes::Single(_)) => cfg.cutoff,
        (Arity::Two, Modes::Pair(_, _)) => cfg.cutoff * cfg.cutoff,
        _ => {
            return Err(Error::Shape(format!(
                "gate arity {:?} does not match modes {modes:?}",
                gate.arity
            )))
        }
    };
    if gate.entries.dim() != (expected, expected) {
        return Err(Error::Shape(format!(
            "gate is {:?}, expected {expected}x{expected}",
            gate.entries.dim()
        )));
    }
    match modes {
        Modes::Single(m) => state.check_mode(m)?,
        Modes::Pair(a, b) => {
            state.check_mode(a)?;
            state.check_mode(b)?;
            if a == b {
                return Err(Error::Shape("two-mode gate on a single mode".into()));
            }
        }
    }
    let amplitudes = apply_matrix(&state.amplitudes, &gate.entries, modes, &cfg, Transpose::None);
    Ok(FockState {
        amplitudes,
        config: cfg,
    })
}

/// Raw contraction of a (cutoff or cutoff^2 sized) matrix into a flat amplitude
/// vector. Shapes are assumed checked by the caller.
pub(crate) fn apply_matrix(
    amps: &[Complex64],
    m: &CMatrix,
    modes: Modes,
    cfg: &SimConfig,
    transpose: Transpose,
) -> Vec<Complex64> {
    let d = cfg.cutoff;
    let strides: Vec<usize> = (0..cfg.modes)
        .map(|k| d.pow((cfg.modes - 1 - k) as u32))
        .collect();
    let entry = |i: usize, j: usize| match transpose {
        Transpose::None => m[[i, j]],
        Transpose::Adjoint => m[[j, i]].conj(),
    };
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];

    match modes {
        Modes::Single(k) => {
            let s = strides[k];
            let mut local = vec![Complex64::new(0.0, 0.0); d];
            for base in (0..amps.len()).filter(|i| (i / s).is_multiple_of(d)) {
                for (n, slot) in local.iter_mut().enumerate() {
                    *slot = amps[base + n * s];
                }
                for i in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, v) in local.iter().enumerate() {
                        if v.re != 0.0 || v.im != 0.0 {
                            acc += entry(i, j) * v;
                        }
                    }
                    out[base + i * s] = acc;
                }
            }
        }
        Modes::Pair(a, b) => {
            let (sa, sb) = (strides[a], strides[b]);
            let dd = d * d;
            let mut local = vec![Complex64::new(0.0, 0.0); dd];
            for base in (0..amps.len()).filter(|i| (i / sa) % d == 0 && (i / sb) % d == 0) {
                for na in 0..d {
                    for nb in 0..d {
                        local[na * d + nb] = amps[base + na * sa + nb * sb];
                    }
                }
                for i in 0..dd {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, v) in local.iter().enumerate() {
                        if v.re != 0.0 || v.im != 0.0 {
                            acc += entry(i, j) * v;
                        }
                    }
                    out[base + (i / d) * sa + (i % d) * sb] = acc;
                }
            }
        }
    }
    out
}

/// `X_phi |psi>` on one mode (unnormalized), with `X_phi = c (a e^{-i phi} + a^dagger e^{i phi})`.
pub(crate) fn quadrature_apply(
    amps: &[Complex64],
    mode: usize,
    phi: f64,
    cfg: &SimConfig,
) -> Vec<Complex64> {
    let d = cfg.cutoff;
    let s = d.pow((cfg.modes - 1 - mode) as u32);
    let c = cfg.quadrature_scale();
    let e = Complex64::from_polar(c, phi);
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (i, slot) in out.iter_mut().enumerate() {
        let n = (i / s) % d;
        let mut acc = Complex64::new(0.0, 0.0);
        // a|n+1> = sqrt(n+1)|n>
        if n + 1 < d {
            acc += e.conj() * ((n + 1) as f64).sqrt() * amps[i + s];
        }
        // a^dagger|n-1> = sqrt(n)|n>
        if n > 0 {
            acc += e * (n as f64).sqrt() * amps[i - s];
        }
        *slot = acc;
    }
    out
}

/// Normalized quadrature expectation `<psi|X_phi|psi> / <psi|psi>`; `phi = pi/2` gives `<P>`.
pub fn quadrature_expectation(state: &FockState, mode: usize, phi: f64) -> Result<f64> {
    state.check_mode(mode)?;
    let norm = state.nonzero_norm()?;
    let d = state.config.cutoff;
    let s = d.pow((state.config.modes - 1 - mode) as u32);
    // <a> = sum_n sqrt(n) conj(psi_{n-1}) psi_n
    let mut a_mean = Complex64::new(0.0, 0.0);
    for (i, z) in state.amplitudes.iter().enumerate() {
        let n = (i / s) % d;
        if n > 0 {
            a_mean += state.amplitudes[i - s].conj() * z * (n as f64).sqrt();
        }
    }
    let c = state.config.quadrature_scale();
    Ok(2.0 * c * (Complex64::from_polar(1.0, -phi) * a_mean).re / norm)
}
