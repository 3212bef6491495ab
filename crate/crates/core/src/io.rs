//! Loading multiplier matrices and elements from files.

use std::fs;
use std::path::Path;

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::transforms::{SchurMatrix, LOAD_SYMMETRY_TOL};

/// Dense CSV, one row per line, no header. Asymmetry up to 1e-12 is
/// accepted and symmetrized.
pub fn schur_from_csv(text: &str) -> Result<SchurMatrix> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::Parse(format!("bad matrix entry '{f}'"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    SchurMatrix::from_rows_tolerant(&rows, LOAD_SYMMETRY_TOL)
}

/// JSON nested arrays.
pub fn schur_from_json(text: &str) -> Result<SchurMatrix> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(text)?;
    SchurMatrix::from_rows_tolerant(&rows, LOAD_SYMMETRY_TOL)
}

/// Picks JSON for `.json` files or text starting with `[`, CSV otherwise.
pub fn load_schur(path: &Path) -> Result<SchurMatrix> {
    let text = fs::read_to_string(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('[');
    if is_json {
        schur_from_json(&text)
    } else {
        schur_from_csv(&text)
    }
}

/// Element JSON `{kind, n | factors, coords}`.
pub fn load_element(path: &Path) -> Result<Element> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
