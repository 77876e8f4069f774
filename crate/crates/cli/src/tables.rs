// SPDX-License-Identifier: Apache-2.0

//! Comma-separated matrices with a `class_0,...,class_{K-1}` header.

use std::path::Path;

use camloc_core::calib::CalibrationTable;
use camloc_core::{LabelMatrix, RealMatrix};

use crate::error::CliError;

fn header(classes: usize) -> Vec<String> {
    (0..classes).map(|c| format!("class_{c}")).collect()
}

fn read_cells(path: &Path) -> Result<Vec<Vec<String>>, CliError> {
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let found: Vec<String> = reader
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if found.is_empty() || found != header(found.len()) {
        return Err(bad(format!(
            "header must be class_0,...,class_{{K-1}}, found {found:?}"
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != found.len() {
            return Err(bad(format!(
                "row {} has {} fields, expected {}",
                i + 1,
                record.len(),
                found.len()
            )));
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }
    if rows.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(rows)
}

fn parse_real(path: &Path, row: usize, cell: &str) -> Result<f64, CliError> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Input(format!(
            "{}: row {}: '{cell}' is not a finite number",
            path.display(),
            row + 1
        ))),
    }
}

pub fn read_real(path: &Path) -> Result<RealMatrix<f64>, CliError> {
    let rows = read_cells(path)?;
    let parsed = rows
        .iter()
        .enumerate()
        .map(|(r, row)| row.iter().map(|c| parse_real(path, r, c)).collect())
        .collect::<Result<Vec<Vec<f64>>, _>>()?;
    Ok(RealMatrix::from_rows(&parsed)?)
}

pub fn read_labels(path: &Path) -> Result<LabelMatrix, CliError> {
    let rows = read_cells(path)?;
    let parsed = rows
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .map(|c| match c.as_str() {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    _ => Err(CliError::Input(format!(
                        "{}: row {}: label '{c}' is not 0 or 1",
                        path.display(),
                        r + 1
                    ))),
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<bool>>, _>>()?;
    Ok(LabelMatrix::from_rows(&parsed)?)
}

/// A single data row of per-class shifts.
pub fn read_shifts(path: &Path) -> Result<CalibrationTable<f64>, CliError> {
    let m = read_real(path)?;
    if m.samples() != 1 {
        return Err(CliError::Input(format!(
            "{}: shift file needs exactly one data row, found {}",
            path.display(),
            m.samples()
        )));
    }
    Ok(CalibrationTable::new(m.row(0).to_vec())?)
}

fn write_rows(path: &Path, classes: usize, rows: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
    let bad = |e: csv::Error| CliError::Input(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(bad)?;
    w.write_record(header(classes)).map_err(bad)?;
    for row in rows {
        w.write_record(row).map_err(bad)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_real(path: &Path, m: &RealMatrix<f64>) -> Result<(), CliError> {
    write_rows(
        path,
        m.classes(),
        (0..m.samples()).map(|n| m.row(n).iter().map(|v| v.to_string()).collect()),
    )
}

pub fn write_labels(path: &Path, m: &LabelMatrix) -> Result<(), CliError> {
    write_rows(
        path,
        m.classes(),
        (0..m.samples()).map(|n| m.row(n).iter().map(|&b| u8::from(b).to_string()).collect()),
    )
}

pub fn write_shifts(path: &Path, table: &CalibrationTable<f64>) -> Result<(), CliError> {
    write_real(
        path,
        &RealMatrix::new(1, table.classes(), table.shifts().to_vec())?,
    )
}
