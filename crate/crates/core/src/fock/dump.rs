//! Plain-text matrix dumps: one line per row, entries written as `re,im`
//! separated by single spaces. Values use the shortest round-trip decimal
//! form, so `parse_matrix(format_matrix(m)) == m` exactly.

use num_complex::Complex64;

use super::expm::CMatrix;
use crate::error::{Error, Result};

pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|z| format!("{:?},{:?}", z.re, z.im)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                let (re, im) = tok
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("line {}: expected re,im in {tok:?}", lineno + 1)))?;
                let parse = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("line {}: {s:?}: {e}", lineno + 1)))
                };
                Ok(Complex64::new(parse(re)?, parse(im)?))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("gate dump is not square".into()));
    }
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    CMatrix::from_shape_vec((n, n), flat).map_err(|e| Error::Shape(e.to_string()))
}
