use num_complex::Complex64;

use super::expm::{annihilation_matrix, matrix_exponential, CMatrix};
use super::SimConfig;
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    One,
    Two,
}

/// A gate restricted to the truncated space: `cutoff` square for single-mode
/// gates, `cutoff^2` square for two-mode gates.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    pub entries: CMatrix,
    pub arity: Arity,
}

impl GateMatrix {
    pub fn single(entries: CMatrix) -> Self {
        GateMatrix {
            entries,
            arity: Arity::One,
        }
    }

    pub fn two_mode(entries: CMatrix) -> Self {
        GateMatrix {
            entries,
            arity: Arity::Two,
        }
    }

    pub fn identity(arity: Arity, cutoff: usize) -> Self {
        let n = match arity {
            Arity::One => cutoff,
            Arity::Two => cutoff * cutoff,
        };
        GateMatrix {
            entries: CMatrix::eye(n),
            arity,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Euclidean norm of column `n`.
    pub fn column_norm(&self, n: usize) -> f64 {
        self.entries.column(n).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation of `G^dagger G` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let gd = self.entries.t().mapv(|z| z.conj());
        let prod = gd.dot(&self.entries);
        prod.indexed_iter()
            .map(|((i, j), z)| {
                let want = if i == j { 1.0 } else { 0.0 };
                (z - want).norm()
            })
            .fold(0.0, f64::max)
    }
}

fn dagger(m: &CMatrix) -> CMatrix {
    m.t().mapv(|z| z.conj())
}

fn scaled(m: &CMatrix, s: Complex64) -> CMatrix {
    m.mapv(|z| z * s)
}

fn diagonal(values: impl IntoIterator<Item = Complex64>, n: usize) -> CMatrix {
    let mut out = CMatrix::zeros((n, n));
    for (k, v) in values.into_iter().enumerate().take(n) {
        out[[k, k]] = v;
    }
    out
}

fn check_magnitude(kind: &str, r: f64, limit: f64) -> Result<()> {
    if !r.is_finite() {
        return Err(Error::Domain(format!("{kind} magnitude is not finite")));
    }
    if r.abs() > limit {
        return Err(Error::Domain(format!(
            "{kind} magnitude {r} exceeds the safety limit {limit}"
        )));
    }
    Ok(())
}

/// `D(r e^{i phi}) = exp(alpha a^dagger - alpha^* a)`.
pub fn displacement_gate(r: f64, phi: f64, cfg: &SimConfig) -> Result<GateMatrix> {
    displacement_with_derivative(r, phi, cfg).map(|(g, _)| g)
}

/// Displacement together with its derivative in the magnitude `r`.
///
/// Uses `D = e^{-|alpha|^2/2} e^{alpha a^dagger} e^{-alpha^* a}`. Both factors
/// have nilpotent truncated generators and the raising factor sits on the left,
/// so the product reproduces the ideal matrix elements inside the cutoff.
pub fn displacement_with_derivative(
    r: f64,
    phi: f64,
    cfg: &SimConfig,
) -> Result<(GateMatrix, CMatrix)> {
    check_magnitude("displacement", r, cfg.displacement_limit)?;
    let a = annihilation_matrix(cfg.cutoff)?;
    let ad = dagger(&a);
    let alpha = Complex64::from_polar(r, phi);

    let raise = matrix_exponential(&scaled(&ad, alpha))?;
    let lower = matrix_exponential(&scaled(&a, -alpha.conj()))?;
    let u = raise.dot(&lower).mapv(|z| z * (-0.5 * r * r).exp());

    // dD/dr = e^{i phi} a^dagger D - e^{-i phi} D a - r D, exact inside the cutoff.
    let e = Complex64::from_polar(1.0, phi);
    let du = scaled(&ad.dot(&u), e) - scaled(&u.dot(&a), e.conj()) - scaled(&u, Complex64::new(r, 0.0));
    Ok((GateMatrix::single(u), du))
}

/// `S(z) = exp((z^* a^2 - z a^dagger^2) / 2)` with `z = r e^{i phi}`.
pub fn squeezing_gate(r: f64, phi: f64, cfg: &SimConfig) -> Result<GateMatrix> {
    squeezing_with_derivative(r, phi, cfg).map(|(g, _)| g)
}

/// Squeezing together with its derivative in `r`, via the disentangled form
/// `exp(-e^{i phi} tanh(r) a^dagger^2 / 2) cosh(r)^{-(n + 1/2)} exp(e^{-i phi} tanh(r) a^2 / 2)`.
pub fn squeezing_with_derivative(
    r: f64,
    phi: f64,
    cfg: &SimConfig,
) -> Result<(GateMatrix, CMatrix)> {
    check_magnitude("squeezing", r, cfg.squeezing_limit)?;
    let d = cfg.cutoff;
    let a = annihilation_matrix(d)?;
    let a2 = a.dot(&a);
    let ad2 = dagger(&a2);
    let e = Complex64::from_polar(1.0, phi);
    let t = r.tanh();
    let dt = 1.0 / (r.cosh() * r.cosh());

    let left = matrix_exponential(&scaled(&ad2, -0.5 * e * t))?;
    let right = matrix_exponential(&scaled(&a2, 0.5 * e.conj() * t))?;
    let ln_cosh = r.cosh().ln();
    let middle = diagonal(
        (0..d).map(|n| Complex64::new((-(n as f64 + 0.5) * ln_cosh).exp(), 0.0)),
        d,
    );
    let dmiddle = diagonal(
        (0..d).map(|n| Complex64::new(-(n as f64 + 0.5) * t * (-(n as f64 + 0.5) * ln_cosh).exp(), 0.0)),
        d,
    );

    let u = left.dot(&middle).dot(&right);
    let du = scaled(&ad2.dot(&u), -0.5 * e * dt)
        + left.dot(&dmiddle).dot(&right)
        + scaled(&u.dot(&a2), 0.5 * e.conj() * dt);
    Ok((GateMatrix::single(u), du))
}

/// `R(phi) = exp(i phi n)`.
pub fn rotation_gate(phi: f64, cfg: &SimConfig) -> GateMatrix {
    let d = cfg.cutoff;
    GateMatrix::single(diagonal(
        (0..d).map(|n| Complex64::from_polar(1.0, phi * n as f64)),
        d,
    ))
}

/// `K(kappa) = exp(i kappa n^2)`.
pub fn kerr_gate(kappa: f64, cfg: &SimConfig) -> GateMatrix {
    let d = cfg.cutoff;
    GateMatrix::single(diagonal(
        (0..d).map(|n| Complex64::from_polar(1.0, kappa * (n * n) as f64)),
        d,
    ))
}

/// `BS(theta, phi) = exp(theta (e^{i phi} a^dagger b - e^{-i phi} a b^dagger))`
/// on a mode pair, `a` being the first mode of the pair.
pub fn beamsplitter_gate(theta: f64, phi: f64, cfg: &SimConfig) -> Result<GateMatrix> {
    beamsplitter_with_derivatives(theta, phi, cfg).map(|(g, _)| g)
}

/// Beamsplitter with derivatives in `theta` and `phi`.
///
/// The generator preserves the total photon number `N`, so it splits into
/// blocks spanned by `|k, N-k>`. Each block is complete in the ideal space,
/// so exponentiating blocks up to `N = 2 (cutoff - 1)` and keeping entries
/// with both occupations below the cutoff gives the exact restriction.
pub fn beamsplitter_with_derivatives(
    theta: f64,
    phi: f64,
    cfg: &SimConfig,
) -> Result<(GateMatrix, [CMatrix; 2])> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::Domain("beamsplitter angles must be finite".into()));
    }
    let d = cfg.cutoff;
    let dim = d * d;
    let mut u = CMatrix::zeros((dim, dim));
    let mut du_theta = CMatrix::zeros((dim, dim));
    let mut du_phi = CMatrix::zeros((dim, dim));
    let e = Complex64::from_polar(1.0, phi);

    for total in 0..=(2 * (d - 1)) {
        let size = total + 1;
        // Basis k -> |k, total - k>.
        let mut gen = CMatrix::zeros((size, size));
        for k in 0..size {
            if k < total {
                gen[[k + 1, k]] = e * (((k + 1) * (total - k)) as f64).sqrt();
            }
            if k > 0 {
                gen[[k - 1, k]] = -e.conj() * ((k * (total - k + 1)) as f64).sqrt();
            }
        }
        let block = matrix_exponential(&scaled(&gen, Complex64::new(theta, 0.0)))?;
        let dblock = gen.dot(&block);

        let kept = |k: usize| k < d && total - k < d;
        for col in (0..size).filter(|&k| kept(k)) {
            let j = col * d + (total - col);
            for row in (0..size).filter(|&k| kept(k)) {
                let i = row * d + (total - row);
                u[[i, j]] = block[[row, col]];
                du_theta[[i, j]] = dblock[[row, col]];
                // d/dphi = i [n_a, U]
                du_phi[[i, j]] = I * (row as f64 - col as f64) * block[[row, col]];
            }
        }
    }
    Ok((GateMatrix::two_mode(u), [du_theta, du_phi]))
}
