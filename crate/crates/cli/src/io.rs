// SPDX-License-Identifier: MIT OR Apache-2.0

//! Series CSV (single column, header `value`) and JSON output helpers.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Serialize, Deserialize)]
struct ValueRow {
    value: f64,
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        CliError::io(path, e)
    } else {
        CliError::invalid(format!("{}: {e}", path.display()))
    }
}

/// Reads a single-column series with header `value`.
pub fn read_series(path: &Path) -> CliResult<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?;
    if headers.len() != 1 || &headers[0] != "value" {
        return Err(CliError::invalid(format!(
            "{}: expected a single column with header `value`",
            path.display()
        )));
    }
    let mut values = Vec::new();
    for (i, row) in rdr.deserialize::<ValueRow>().enumerate() {
        let v = row.map_err(|e| csv_error(path, e))?.value;
        if !v.is_finite() {
            return Err(CliError::invalid(format!(
                "{}: row {}: non-finite value",
                path.display(),
                i + 1
            )));
        }
        values.push(v);
    }
    Ok(values)
}

/// Writes serializable rows as CSV with a header line.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut wtr = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        wtr.serialize(row).map_err(|e| CliError::io(path, e))?;
    }
    wtr.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_series(path: &Path, values: &[f64]) -> CliResult<()> {
    let rows: Vec<ValueRow> = values.iter().map(|&value| ValueRow { value }).collect();
    if rows.is_empty() {
        // csv only emits the header together with the first record
        return std::fs::write(path, "value\n").map_err(|e| CliError::io(path, e));
    }
    write_rows(path, &rows)
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))
}
