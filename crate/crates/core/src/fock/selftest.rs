//! Runtime oracle checks for the gate set, used by `gates-selftest`.

use num_complex::Complex64;

use super::{
    annihilation_matrix, beamsplitter_gate, displacement_gate, kerr_gate, rotation_gate, squeezing_gate, SimConfig,
};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestCheck {
    pub name: String,
    pub passed: bool,
    /// Largest observed error against the stated tolerance.
    pub detail: String,
}

fn check(name: impl Into<String>, error: f64, tol: f64) -> SelfTestCheck {
    SelfTestCheck {
        name: name.into(),
        passed: error <= tol,
        detail: format!("max error {error:.3e} (tolerance {tol:.0e})"),
    }
}

fn failed(name: impl Into<String>, err: crate::error::Error) -> SelfTestCheck {
    SelfTestCheck {
        name: name.into(),
        passed: false,
        detail: err.to_string(),
    }
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Coherent-state column `e^{-r^2/2} (r e^{i phi})^n / sqrt(n!)`.
pub fn coherent_amplitude(r: f64, phi: f64, n: usize) -> Complex64 {
    let mag = if n == 0 {
        (-r * r / 2.0).exp()
    } else {
        (-r * r / 2.0 + n as f64 * r.ln() - 0.5 * ln_factorial(n)).exp()
    };
    Complex64::from_polar(mag, n as f64 * phi)
}

/// `<n| S(r, 0) |0>`: zero for odd `n`, and for `n = 2m`
/// `(-tanh r)^m sqrt((2m)!) / (2^m m! sqrt(cosh r))`.
pub fn squeezed_vacuum_amplitude(r: f64, n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let m = n / 2;
    let mag = (0.5 * ln_factorial(n) - m as f64 * 2f64.ln() - ln_factorial(m)).exp();
    (-r.tanh()).powi(m as i32) * mag / r.cosh().sqrt()
}

fn coherent_columns(cfg: &SimConfig) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0, 2.0] {
        for phi in [0.0, 0.7, -2.1] {
            let g = displacement_gate(r, phi, cfg)?;
            for n in 0..=8 {
                worst = worst.max((g.entries[[n, 0]] - coherent_amplitude(r, phi, n)).norm());
            }
        }
    }
    Ok(worst)
}

fn squeezed_columns(cfg: &SimConfig) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for r in [0.25, 0.5, 0.75] {
        let g = squeezing_gate(r, 0.0, cfg)?;
        for n in 0..cfg.cutoff {
            worst = worst.max((g.entries[[n, 0]] - squeezed_vacuum_amplitude(r, n)).norm());
        }
    }
    Ok(worst)
}

fn phase_gates(cfg: &SimConfig) -> f64 {
    [0.3, 1.7, -4.0]
        .into_iter()
        .map(|x| rotation_gate(x, cfg).unitarity_defect().max(kerr_gate(x, cfg).unitarity_defect()))
        .fold(0.0, f64::max)
}

/// Count of entries coupling different total photon numbers.
fn beamsplitter_leaks(cfg: &SimConfig) -> Result<usize> {
    let d = cfg.cutoff;
    let mut leaks = 0;
    for (theta, phi) in [(0.4, 0.0), (1.1, 2.5), (std::f64::consts::FRAC_PI_4, -1.0)] {
        let g = beamsplitter_gate(theta, phi, cfg)?;
        for ((i, j), z) in g.entries.indexed_iter() {
            let (ni, nj) = (i / d + i % d, j / d + j % d);
            if ni != nj && (z.re != 0.0 || z.im != 0.0) {
                leaks += 1;
            }
        }
    }
    Ok(leaks)
}

/// `[a, a^dagger] = diag(1, .., 1, -(D - 1))` in the truncated space.
pub fn commutator_defect(cutoff: usize) -> Result<f64> {
    let a = annihilation_matrix(cutoff)?;
    let ad = a.t().mapv(|z| z.conj());
    let c = a.dot(&ad) - ad.dot(&a);
    Ok(c.indexed_iter()
        .map(|((i, j), z)| {
            let want = match (i == j, i + 1 == cutoff) {
                (false, _) => 0.0,
                (true, false) => 1.0,
                (true, true) => -((cutoff - 1) as f64),
            };
            (z - want).norm()
        })
        .fold(0.0, f64::max))
}

/// Runs every check at the cutoff used for training (16).
pub fn gates_selftest() -> Vec<SelfTestCheck> {
    let cfg = SimConfig::new(1, 16).expect("valid config");
    let cfg2 = SimConfig::new(2, 16).expect("valid config");
    let mut out = Vec::new();
    let name = "displacement column 0 = coherent state (r in {0.5,1,2}, n <= 8)";
    out.push(match coherent_columns(&cfg) {
        Ok(e) => check(name, e, 1e-9),
        Err(e) => failed(name, e),
    });
    let name = "squeezing column 0 = squeezed vacuum (r in {0.25,0.5,0.75})";
    out.push(match squeezed_columns(&cfg) {
        Ok(e) => check(name, e, 1e-8),
        Err(e) => failed(name, e),
    });
    out.push(check("rotation and Kerr unitarity", phase_gates(&cfg), 1e-12));
    let name = "beamsplitter conserves total photon number";
    out.push(match beamsplitter_leaks(&cfg2) {
        Ok(n) => SelfTestCheck {
            name: name.into(),
            passed: n == 0,
            detail: format!("{n} entries couple different photon-number blocks"),
        },
        Err(e) => failed(name, e),
    });
    for d in [2, 4, 16] {
        let name = format!("truncated commutator, D = {d}");
        out.push(match commutator_defect(d) {
            Ok(e) => check(name, e, 1e-13),
            Err(e) => failed(name, e),
        });
    }
    out
}
