//! Plain-text matrices: the dimension on the first line, then `dim²` entries
//! `re im`, row-major, one per line.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, so `read(write(m)) == m` bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use fracop_core::linalg::{CMatrix, C64};
use fracop_core::operator::FiniteOperator;

#[derive(Debug)]
pub enum MatrixError {
    Io(std::io::Error),
    Parse { line: usize, message: String },
    Core(fracop_core::Error),
}

impl std::fmt::Display for MatrixError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatrixError::Io(e) => write!(f, "{e}"),
            MatrixError::Parse { line, message } => write!(f, "line {line}: {message}"),
            MatrixError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for MatrixError {}

impl From<std::io::Error> for MatrixError {
    fn from(e: std::io::Error) -> Self {
        MatrixError::Io(e)
    }
}

/// Shortest round-trip decimal form; exponent notation outside `[1e-5, 1e16)`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v == 0.0 || (1e-5..1e16).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_matrix(m: &CMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", m.nrows());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            let _ = writeln!(out, "{} {}", fmt_f64(z.re), fmt_f64(z.im));
        }
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<CMatrix, MatrixError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (first, dim_line) = lines.next().ok_or(MatrixError::Parse { line: 0, message: "empty matrix file".into() })?;
    let dim: usize = dim_line
        .parse()
        .map_err(|_| MatrixError::Parse { line: first, message: format!("bad dimension {dim_line:?}") })?;
    let mut entries = Vec::with_capacity(dim * dim);
    for (line, text) in lines {
        let mut parts = text.split_whitespace();
        let mut next = |what: &str| -> Result<f64, MatrixError> {
            let tok = parts.next().ok_or(MatrixError::Parse { line, message: format!("missing {what} part") })?;
            tok.parse::<f64>().map_err(|_| MatrixError::Parse { line, message: format!("bad number {tok:?}") })
        };
        let re = next("real")?;
        let im = next("imaginary")?;
        if parts.next().is_some() {
            return Err(MatrixError::Parse { line, message: "expected exactly two numbers".into() });
        }
        entries.push(C64::new(re, im));
    }
    if entries.len() != dim * dim {
        return Err(MatrixError::Parse {
            line: 0,
            message: format!("expected {} entries, found {}", dim * dim, entries.len()),
        });
    }
    Ok(CMatrix::from_row_iterator(dim, dim, entries))
}

pub fn read_operator(path: &Path) -> Result<FiniteOperator, MatrixError> {
    let text = std::fs::read_to_string(path)?;
    FiniteOperator::new(parse_matrix(&text)?).map_err(MatrixError::Core)
}

pub fn write_operator(path: &Path, m: &CMatrix) -> Result<(), MatrixError> {
    std::fs::write(path, write_matrix(m))?;
    Ok(())
}
