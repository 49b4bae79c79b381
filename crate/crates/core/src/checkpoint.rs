//! Flat named-parameter text checkpoints.
//!
//! ```text
//! # photonic policy, variant reupload
//! layer.0.bs1.theta = 1.2345678901234567e0
//! ```
//!
//! Values are written with 17 significant digits, which round-trips every f64.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type NamedValues = Vec<(String, f64)>;

pub fn format(header: &str, values: &[(String, f64)]) -> String {
    let mut out = String::new();
    for line in header.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    for (name, v) in values {
        out.push_str(&format!("{name} = {v:.16e}\n"));
    }
    out
}

pub fn parse(text: &str) -> Result<NamedValues> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `name = value`", lineno + 1)))?;
        let name = name.trim().to_string();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if seen.insert(name.clone(), ()).is_some() {
            return Err(Error::Parse(format!("duplicate parameter {name}")));
        }
        out.push((name, value));
    }
    Ok(out)
}

/// Values for `names` in that order. Missing or unexpected names are errors.
pub fn lookup_all(named: &[(String, f64)], names: &[String]) -> Result<Vec<f64>> {
    let map: HashMap<&str, f64> = named.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    if let Some((extra, _)) = named.iter().find(|(k, _)| !names.contains(k)) {
        return Err(Error::Parse(format!("unknown parameter {extra}")));
    }
    names
        .iter()
        .map(|n| {
            map.get(n.as_str())
                .copied()
                .ok_or_else(|| Error::Parse(format!("missing parameter {n}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let text = "# header\n\n  a.b = 1.5\nc=-2e-3\n";
        let v = parse(text).unwrap();
        assert_eq!(v, vec![("a.b".to_string(), 1.5), ("c".to_string(), -2e-3)]);
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(parse("a = 1\na = 2\n").is_err());
        assert!(parse("a 1\n").is_err());
        assert!(parse("a = x\n").is_err());
    }

    #[test]
    fn seventeen_digits_round_trip() {
        let vals = [0.1, 1.0 / 3.0, -std::f64::consts::E, 1e-300, 123456789.123456789];
        let named: NamedValues = vals.iter().enumerate().map(|(i, v)| (format!("p{i}"), *v)).collect();
        assert_eq!(parse(&format("x", &named)).unwrap(), named);
    }
}
