//! Plain-text input and output for the commands.
//!
//! Datasets are headered CSV with coordinate columns `x1_1,x2_1,...`
//! and an optional trailing `label` column. Every number we write uses
//! 17 significant digits so a round trip through text is exact.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cvkernels::states::DataPoint;

use crate::CliError;

pub struct Dataset {
    pub points: Vec<DataPoint>,
    pub labels: Option<Vec<f64>>,
    /// Coordinate header names, kept so predictions echo the query
    /// layout.
    pub coord_names: Vec<String>,
}

impl Dataset {
    pub fn modes(&self) -> usize {
        self.coord_names.len() / 2
    }
}

pub fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .clone();
    if headers.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no header row",
            path.display()
        )));
    }
    let has_label = headers.iter().next_back() == Some("label");
    let coord_count = headers.len() - usize::from(has_label);
    if coord_count == 0 || coord_count % 2 != 0 {
        return Err(CliError::Data(format!(
            "{}: {coord_count} coordinate columns, expected (x1, x2) pairs",
            path.display()
        )));
    }
    let coord_names: Vec<String> = headers.iter().take(coord_count).map(String::from).collect();
    let mut points = Vec::new();
    let mut labels = has_label.then(Vec::new);
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != headers.len() {
            return Err(CliError::Data(format!(
                "{}: line {line}: {} fields, expected {}",
                path.display(),
                record.len(),
                headers.len()
            )));
        }
        let mut coords = Vec::with_capacity(coord_count);
        for (idx, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: line {line}: `{field}` in column {} is not a number",
                    path.display(),
                    idx + 1
                ))
            })?;
            if idx < coord_count {
                coords.push(value);
            } else if let Some(labels) = labels.as_mut() {
                labels.push(value);
            }
        }
        points.push(DataPoint::new(coords).map_err(|e| {
            CliError::Data(format!("{}: line {line}: {e}", path.display()))
        })?);
    }
    Ok(Dataset {
        points,
        labels,
        coord_names,
    })
}

/// 17 significant digits; parses back to the same double.
pub fn fmt(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|&v| fmt(v)).collect::<Vec<_>>().join(",")
}

pub fn write_text(out: Option<&PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, content)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

/// `base` plus a suffix, e.g. `runs/scan` -> `runs/scan_summary.json`.
pub fn suffixed(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base.file_name().map_or_else(String::new, |n| {
        n.to_string_lossy().into_owned()
    });
    name.push_str(suffix);
    base.with_file_name(name)
}
