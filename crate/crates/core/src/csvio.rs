//! Plain-text formats for histograms, matrices and row groups.
//!
//! * vector: one number per line (commas also accepted as separators)
//! * matrix: one row per line, comma separated
//! * groups: one group per line, whitespace-separated zero-based row indices
//!
//! Blank lines and lines starting with `#` are ignored. Numbers are written
//! with 17 significant digits, which round-trips every `f64` exactly.

use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{OtError, Result};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_number(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|e| OtError::Parse(format!("line {line}: {:?}: {e}", field.trim())))
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        for field in l.split(',').filter(|f| !f.trim().is_empty()) {
            out.push(parse_number(field, line)?);
        }
    }
    if out.is_empty() {
        return Err(OtError::Parse("no values found".into()));
    }
    Ok(out)
}

pub fn parse_matrix(text: &str) -> Result<Array2<f64>> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, l) in content_lines(text) {
        let row: Vec<f64> = l.split(',').map(|f| parse_number(f, line)).collect::<Result<_>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(OtError::Parse(format!("line {line}: expected {c} columns, found {}", row.len())))
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    let cols = cols.ok_or_else(|| OtError::Parse("no rows found".into()))?;
    Ok(Array2::from_shape_vec((rows, cols), data).expect("row lengths checked"))
}

pub fn parse_groups(text: &str) -> Result<Vec<Vec<usize>>> {
    content_lines(text)
        .map(|(line, l)| {
            l.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|f| !f.is_empty())
                .map(|f| f.parse::<usize>().map_err(|e| OtError::Parse(format!("line {line}: {f:?}: {e}"))))
                .collect()
        })
        .collect()
}

pub fn format_vector(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.16e}\n")).collect()
}

pub fn format_matrix(t: ArrayView2<f64>) -> String {
    let mut out = String::new();
    for row in t.rows() {
        let fields: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_vector(&fs::read_to_string(path)?)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn read_groups(path: impl AsRef<Path>) -> Result<Vec<Vec<usize>>> {
    parse_groups(&fs::read_to_string(path)?)
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    Ok(fs::write(path, format_vector(v))?)
}

pub fn write_matrix(path: impl AsRef<Path>, t: ArrayView2<f64>) -> Result<()> {
    Ok(fs::write(path, format_matrix(t))?)
}
