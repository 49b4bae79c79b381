use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = Array2<Complex64>;

const TAYLOR_MAX_TERMS: usize = 40;
const SCALING_TARGET_NORM: f64 = 0.5;

/// Truncated annihilation operator: `<n-1|a|n> = sqrt(n)` on the superdiagonal.
pub fn annihilation_matrix(cutoff: usize) -> Result<CMatrix> {
    if cutoff < 2 {
        return Err(Error::InvalidConfig(format!(
            "cutoff must be at least 2, got {cutoff}"
        )));
    }
    let mut a = CMatrix::zeros((cutoff, cutoff));
    for n in 1..cutoff {
        a[[n - 1, n]] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// `exp(G)` for a square complex matrix.
///
/// Strictly triangular inputs are nilpotent and use the terminating power
/// series directly. Everything else goes through scaling and squaring with a
/// Taylor core evaluated until the terms drop below machine precision.
pub fn matrix_exponential(g: &CMatrix) -> Result<CMatrix> {
    let (rows, cols) = g.dim();
    if rows != cols {
        return Err(Error::Shape(format!(
            "matrix exponential needs a square matrix, got {rows}x{cols}"
        )));
    }
    if rows == 0 {
        return Ok(CMatrix::zeros((0, 0)));
    }
    if let Some(diag) = diagonal_entries(g) {
        let mut out = CMatrix::zeros((rows, rows));
        for (i, z) in diag.into_iter().enumerate() {
            out[[i, i]] = z.exp();
        }
        return Ok(out);
    }
    if is_strictly_triangular(g) {
        return Ok(taylor(g, rows));
    }

    let norm = one_norm(g);
    if !norm.is_finite() {
        return Err(Error::NumericalDegeneracy(
            "matrix exponential of a non-finite matrix".into(),
        ));
    }
    let mut squarings = 0u32;
    if norm > SCALING_TARGET_NORM {
        squarings = (norm / SCALING_TARGET_NORM).log2().ceil() as u32;
    }
    let scale = Complex64::new(0.5f64.powi(squarings as i32), 0.0);
    let scaled = g.mapv(|z| z * scale);
    let mut out = taylor(&scaled, TAYLOR_MAX_TERMS);
    for _ in 0..squarings {
        out = out.dot(&out);
    }
    Ok(out)
}

fn taylor(g: &CMatrix, max_terms: usize) -> CMatrix {
    let n = g.nrows();
    let mut sum = CMatrix::eye(n);
    let mut term = CMatrix::eye(n);
    for k in 1..=max_terms {
        term = term.dot(g).mapv(|z| z / k as f64);
        let size = one_norm(&term);
        sum += &term;
        if size == 0.0 || size < 1e-18 * one_norm(&sum) {
            break;
        }
    }
    sum
}

fn one_norm(m: &CMatrix) -> f64 {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn diagonal_entries(m: &CMatrix) -> Option<Vec<Complex64>> {
    for ((i, j), z) in m.indexed_iter() {
        if i != j && *z != Complex64::new(0.0, 0.0) {
            return None;
        }
    }
    Some(m.diag().to_vec())
}

fn is_strictly_triangular(m: &CMatrix) -> bool {
    let zero = Complex64::new(0.0, 0.0);
    let upper = m.indexed_iter().all(|((i, j), z)| j > i || *z == zero);
    let lower = m.indexed_iter().all(|((i, j), z)| j < i || *z == zero);
    upper || lower
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dagger(m: &CMatrix) -> CMatrix {
        m.t().mapv(|z| z.conj())
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn annihilation_small_cutoffs() {
        let a = annihilation_matrix(2).unwrap();
        assert_eq!(a[[0, 1]], Complex64::new(1.0, 0.0));
        assert_eq!(a.iter().filter(|z| z.norm() != 0.0).count(), 1);

        let a = annihilation_matrix(4).unwrap();
        for n in 1..4 {
            assert_eq!(a[[n - 1, n]].re, (n as f64).sqrt());
        }
        assert_eq!(a.iter().filter(|z| z.norm() != 0.0).count(), 3);
        assert!(matches!(annihilation_matrix(1), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn truncated_commutator_last_entry() {
        for d in [2usize, 4, 16] {
            let a = annihilation_matrix(d).unwrap();
            let ad = dagger(&a);
            let comm = a.dot(&ad) - ad.dot(&a);
            for ((i, j), z) in comm.indexed_iter() {
                let expected = match (i == j, i == d - 1) {
                    (true, true) => -((d - 1) as f64),
                    (true, false) => 1.0,
                    _ => 0.0,
                };
                // sqrt(n) * sqrt(n) may round by an ulp
                assert!((z - expected).norm() < 1e-13, "D={d} ({i},{j}) {z}");
            }
        }
    }

    #[test]
    fn exponential_of_zero_and_diagonal() {
        let zero = CMatrix::zeros((5, 5));
        assert_eq!(matrix_exponential(&zero).unwrap(), CMatrix::eye(5));

        let phi = 0.37;
        let mut g = CMatrix::zeros((6, 6));
        for n in 0..6 {
            g[[n, n]] = Complex64::new(0.0, phi * n as f64);
        }
        let e = matrix_exponential(&g).unwrap();
        for n in 0..6 {
            let want = Complex64::from_polar(1.0, phi * n as f64);
            assert!((e[[n, n]] - want).norm() < 1e-15);
        }
    }

    #[test]
    fn coherent_column_from_truncated_generator() {
        let d = 20;
        let a = annihilation_matrix(d).unwrap();
        let g = &dagger(&a) - &a;
        let e = matrix_exponential(&g).unwrap();
        // Entries far below the cutoff are unaffected by truncating the generator.
        for n in 0..=8 {
            let want = (-0.5f64).exp() / factorial(n).sqrt();
            assert!((e[[n, 0]] - want).norm() < 1e-12, "n={n}: {}", e[[n, 0]]);
        }
    }

    #[test]
    fn dense_generic_matrix_matches_series_identity() {
        // exp(G) exp(-G) = I for a non-normal, non-triangular matrix with large norm.
        let mut g = CMatrix::zeros((4, 4));
        let vals = [0.3, -1.2, 2.5, 0.7, 1.9, -0.4, 0.0, 3.1, -2.2, 0.5, 1.1, -0.9, 0.8, 2.0, -1.5, 0.2];
        for (k, v) in vals.iter().enumerate() {
            g[[k / 4, k % 4]] = Complex64::new(*v, 0.1 * k as f64);
        }
        let e = matrix_exponential(&g).unwrap();
        let einv = matrix_exponential(&g.mapv(|z| -z)).unwrap();
        let prod = e.dot(&einv);
        for ((i, j), z) in prod.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((z - want).norm() < 1e-10, "({i},{j}) {z}");
        }
    }

    #[test]
    fn non_square_is_shape_error() {
        let m = CMatrix::zeros((2, 3));
        assert!(matches!(matrix_exponential(&m), Err(Error::Shape(_))));
    }
}
