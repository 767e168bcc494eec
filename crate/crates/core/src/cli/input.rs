//! CSV ingestion: header row required, `,` separator, `.` decimals.

use std::path::Path;

use crate::allocation::JointSample;
use crate::error::{Result, RiskError};
use crate::sample::SampleSet;

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| RiskError::Input(format!("cannot open {}: {e}", path.display())))
}

fn parse_cell(s: &str, path: &Path, line: u64) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| RiskError::Parse(format!("{}:{line}: '{s}' is not a finite number", path.display())))
}

/// Columns of a CSV file with their header names.
fn columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = reader(path)?;
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| RiskError::Parse(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    if names.is_empty() || names.iter().any(String::is_empty) {
        return Err(RiskError::Parse(format!("{}: header row is missing or has empty names", path.display())));
    }
    let mut cols = vec![Vec::new(); names.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| RiskError::Parse(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        for (col, s) in cols.iter_mut().zip(rec.iter()) {
            col.push(parse_cell(s, path, line)?);
        }
    }
    Ok((names, cols))
}

/// The `loss` column.
pub fn read_losses(path: &Path) -> Result<SampleSet> {
    let (names, mut cols) = columns(path)?;
    let i = names
        .iter()
        .position(|n| n == "loss")
        .ok_or_else(|| RiskError::Parse(format!("{}: no 'loss' column", path.display())))?;
    SampleSet::new(cols.swap_remove(i))
}

/// Columns as components, rows as scenarios.
pub fn read_joint(path: &Path) -> Result<(Vec<String>, JointSample)> {
    let (names, cols) = columns(path)?;
    Ok((names, JointSample::new(cols)?))
}

/// First data row is the location vector, the next `n` rows the scale matrix.
pub fn read_elliptical(path: &Path) -> Result<(Vec<String>, Vec<f64>, Vec<Vec<f64>>)> {
    let (names, cols) = columns(path)?;
    let n = names.len();
    let rows = cols[0].len();
    if rows != n + 1 {
        return Err(RiskError::Parse(format!(
            "{}: expected 1 location row and {n} scale rows, found {rows} rows",
            path.display()
        )));
    }
    let row = |r: usize| cols.iter().map(|c| c[r]).collect::<Vec<f64>>();
    let mu = row(0);
    let sigma = (1..=n).map(row).collect();
    Ok((names, mu, sigma))
}

/// `loss` column CSV whose values parse back bit-for-bit.
pub fn losses_csv(values: &[f64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| RiskError::Internal(e.to_string());
    w.write_record(["loss"]).map_err(io)?;
    for v in values {
        // Display prints the shortest representation that round-trips
        w.write_record([v.to_string()]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| RiskError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| RiskError::Internal(e.to_string()))
}
