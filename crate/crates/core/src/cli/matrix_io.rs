//! Plain-text complex matrix files.
//!
//! One matrix row per line, entries separated by whitespace. An entry is
//! either a `re,im` pair or a complex literal such as `0.5-1.25e-3j`, `2`,
//! or `-0.5j`. Blank lines and lines starting with `#` are ignored.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::CMatrix;

pub fn parse_entry(token: &str) -> Result<Complex64> {
    if let Some((re, im)) = token.split_once(',') {
        let re = re.trim().parse::<f64>();
        let im = im.trim().parse::<f64>();
        return match (re, im) {
            (Ok(re), Ok(im)) => Ok(Complex64::new(re, im)),
            _ => Err(Error::Parse(format!("invalid matrix entry {token:?}"))),
        };
    }
    token
        .parse::<Complex64>()
        .map_err(|_| Error::Parse(format!("invalid matrix entry {token:?}")))
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(parse_entry)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {}: row has {} entries, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("matrix file contains no rows".into()));
    }
    let (n, m) = (rows.len(), rows[0].len());
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn read_matrix(path: &Path) -> Result<(CMatrix, Vec<u8>)> {
    let bytes = std::fs::read(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Error::Parse(format!("{} is not valid UTF-8", path.display())))?;
    let m = parse_matrix(text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok((m, bytes))
}

/// Rows of `re,im` pairs with 17 significant digits.
pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.16e},{:.16e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_forms() {
        assert_eq!(parse_entry("1.5,-2").unwrap(), Complex64::new(1.5, -2.0));
        assert_eq!(parse_entry("0.5-1.25e-3j").unwrap(), Complex64::new(0.5, -1.25e-3));
        assert_eq!(parse_entry("1e-3+2E2j").unwrap(), Complex64::new(1e-3, 200.0));
        assert_eq!(parse_entry("-0.5j").unwrap(), Complex64::new(0.0, -0.5));
        assert_eq!(parse_entry("2").unwrap(), Complex64::new(2.0, 0.0));
        assert!(parse_entry("abc").is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let m = CMatrix::from_fn(3, 3, |i, j| Complex64::new(1.0 / (i + j + 1) as f64, (i as f64 - j as f64).sin()));
        let back = parse_matrix(&format!("# header\n{}", format_matrix(&m))).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(parse_matrix("1 2\n3\n").is_err());
        assert!(parse_matrix("# only comments\n").is_err());
    }
}
