//! Matrix JSON: `{"rows": n, "cols": m, "entries": [[re, im], ...]}`,
//! row-major. Writers emit 17 significant digits so values round-trip.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, LinalgError};
use crate::scalar::{cx, Real};

#[derive(Debug, Error)]
pub enum MatrixFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed matrix JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid matrix: {0}")]
    Invalid(#[from] LinalgError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

pub fn parse_matrix_json<S: Real>(text: &str) -> Result<ComplexMatrix<S>, MatrixFileError> {
    let doc: MatrixDoc = serde_json::from_str(text)?;
    let entries = doc.entries.iter().map(|[r, i]| cx(S::lit(*r), S::lit(*i))).collect();
    Ok(ComplexMatrix::from_row_major(doc.rows, doc.cols, entries)?)
}

pub fn read_matrix_file<S: Real>(path: &Path) -> Result<ComplexMatrix<S>, MatrixFileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| MatrixFileError::Io { path: path.display().to_string(), source })?;
    parse_matrix_json(&text)
}

fn number(x: f64) -> String {
    // JSON has no negative zero distinction worth keeping
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn write_matrix_json<S: Real>(m: &ComplexMatrix<S>) -> String {
    let mut out = String::new();
    write!(out, "{{\"rows\": {}, \"cols\": {}, \"entries\": [", m.rows(), m.cols()).expect("string write");
    for (k, z) in m.row_major().iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        write!(out, "[{}, {}]", number(z.re.as_f64()), number(z.im.as_f64())).expect("string write");
    }
    out.push_str("]}\n");
    out
}
