//! Matrices as CSV: one row per line, comma separated, `#` starts a comment
//! line. Written values carry 17 significant digits, so they read back
//! bit-for-bit.

use std::fs;
use std::io;
use std::path::Path;

use permorb_core::Matrix;

use crate::error::CliError;
use crate::json::format_f64;

/// Parses CSV text. `source` names the input in error messages.
pub fn parse_matrix(text: &str, source: &str) -> Result<Matrix, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::invalid(format!("{source}: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        CliError::invalid(format!(
                        "{source}: line {line}, column {}: expected a finite number, got {field:?}",
                        col + 1
                    ))
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CliError::invalid(format!(
                    "{source}: line {line} has {} columns, expected {}",
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::invalid(format!("{source}: no matrix rows")));
    }
    Matrix::from_rows(&rows).map_err(|e| CliError::invalid(format!("{source}: {e}")))
}

pub fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix(&text, &path.display().to_string())
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    for i in 0..m.rows() {
        writer
            .write_record(m.row(i).iter().map(|&v| format_f64(v)))
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("ASCII output")
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<(), CliError> {
    write_text(path, &format_matrix(m))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    write_text(&tmp, text)?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, io::Error::new(e.kind(), e)))
}
