use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::LabeledSamples;
use crate::error::{Error, Result};

/// Parses lines of `label,feat1,...,featm`; blank lines and `#` comments are skipped.
pub fn parse_samples_csv(text: &str) -> Result<LabeledSamples> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if vals.len() < 2 {
            return Err(Error::Parse(format!("line {}: need a label and at least one feature", lineno + 1)));
        }
        if let Some(first) = rows.first() {
            if first.len() != vals.len() - 1 {
                return Err(Error::Parse(format!("line {}: ragged row", lineno + 1)));
            }
        }
        labels.push(vals[0]);
        rows.push(vals[1..].to_vec());
    }
    if rows.is_empty() {
        return Err(Error::Parse("no samples".into()));
    }
    let m = rows[0].len();
    let features = DMatrix::from_row_iterator(rows.len(), m, rows.into_iter().flatten());
    LabeledSamples::new(features, DVector::from_vec(labels))
}

pub fn load_samples_csv(path: &Path) -> Result<LabeledSamples> {
    parse_samples_csv(&std::fs::read_to_string(path)?)
}

/// Parses a whitespace-separated numeric matrix, one row per line.
pub fn parse_matrix_text(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if rows.first().is_some_and(|r| r.len() != vals.len()) {
            return Err(Error::Parse(format!("line {}: ragged row", lineno + 1)));
        }
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix".into()));
    }
    let n = rows[0].len();
    Ok(DMatrix::from_row_iterator(rows.len(), n, rows.into_iter().flatten()))
}

pub fn load_matrix_text(path: &Path) -> Result<DMatrix<f64>> {
    parse_matrix_text(&std::fs::read_to_string(path)?)
}
