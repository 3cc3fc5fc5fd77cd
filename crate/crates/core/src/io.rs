//! CSV and binary serialization for kernels, fields and tables.
//!
//! CSV files are comma-separated with a header row, LF line endings, and
//! the token `inf` for `+inf`. Numbers carry 9 significant digits.
//! Binary dumps are raw little-endian `f64`, row-major, `+inf` as IEEE infinity.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::{ScalarField, TorusGrid};
use crate::minplus::{ActionKernel, MinPlusMatrix, TimeSpan};

/// Format with at most 9 significant digits, `inf` for `+inf`.
pub fn fmt_csv(v: f64) -> String {
    if v == f64::INFINITY {
        return "inf".to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse::<f64>().unwrap_or(v) + 0.0;
    let a = rounded.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub fn parse_value(token: &str) -> Result<f64> {
    let t = token.trim();
    if t == "inf" {
        return Ok(f64::INFINITY);
    }
    t.parse::<f64>()
        .map_err(|e| Error::Config(format!("bad number {t:?}: {e}")))
}

pub fn matrix_to_csv(m: &MinPlusMatrix) -> String {
    let mut s = String::from("i,j,value\n");
    for i in 0..m.size() {
        for (j, v) in m.row(i).iter().enumerate() {
            let _ = writeln!(s, "{i},{j},{}", fmt_csv(*v));
        }
    }
    s
}

pub fn kernel_to_csv(k: &ActionKernel) -> String {
    matrix_to_csv(k.matrix())
}

pub fn matrix_from_csv(text: &str, size: usize) -> Result<MinPlusMatrix> {
    let mut data = vec![f64::INFINITY; size * size];
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("line {}: expected i,j,value", lineno + 1)));
        }
        let i: usize = parts[0].trim().parse().map_err(|_| Error::Config(format!("line {}: bad row index", lineno + 1)))?;
        let j: usize = parts[1].trim().parse().map_err(|_| Error::Config(format!("line {}: bad column index", lineno + 1)))?;
        if i >= size || j >= size {
            return Err(Error::Config(format!("line {}: index out of range", lineno + 1)));
        }
        data[i * size + j] = parse_value(parts[2])?;
    }
    MinPlusMatrix::new(size, data)
}

pub fn kernel_from_csv(text: &str, grid: TorusGrid, time: TimeSpan) -> Result<ActionKernel> {
    ActionKernel::new(grid, time, matrix_from_csv(text, grid.len())?)
}

pub fn field_to_csv(u: &ScalarField) -> String {
    let mut s = String::from("i,value\n");
    for (i, v) in u.values().iter().enumerate() {
        let _ = writeln!(s, "{i},{}", fmt_csv(*v));
    }
    s
}

pub fn field_from_csv(text: &str, grid: TorusGrid) -> Result<ScalarField> {
    let mut values = vec![f64::INFINITY; grid.len()];
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (i, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Config(format!("line {}: expected i,value", lineno + 1)))?;
        let i: usize = i.trim().parse().map_err(|_| Error::Config(format!("line {}: bad index", lineno + 1)))?;
        if i >= values.len() {
            return Err(Error::Config(format!("line {}: index out of range", lineno + 1)));
        }
        values[i] = parse_value(v)?;
    }
    ScalarField::new(grid, values)
}

pub fn write_binary<W: Write>(mut w: W, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Vec<f64>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if buf.len() % 8 != 0 {
        return Err(Error::Config(format!("binary dump length {} is not a multiple of 8", buf.len())));
    }
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}
