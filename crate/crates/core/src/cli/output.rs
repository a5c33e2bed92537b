//! Fixed-format CSV emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// C-style `%.12e`: twelve mantissa digits, signed exponent with at least two digits.
pub fn fmt_e(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// CSV text with a header row and `%.12e` cells.
pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_e(v)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Path of the JSON sidecar next to `csv_path`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printf_exponent_format() {
        assert_eq!(fmt_e(1.0), "1.000000000000e+00");
        assert_eq!(fmt_e(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(fmt_e(6.02214076e123), "6.022140760000e+123");
        assert_eq!(fmt_e(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let s = csv(&["a", "b"], &[vec![1.0, 2.0]]);
        assert_eq!(s, "a,b\n1.000000000000e+00,2.000000000000e+00\n");
    }
}
