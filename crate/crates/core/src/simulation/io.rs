//! Dataset CSV format: header `y_1,…,y_d[,z]`, one observation per row,
//! values written with 17 significant digits, labels one-based.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DVector;

use crate::error::{MixtureError, Result};
use crate::params::Dataset;

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

fn csv_error(err: csv::Error) -> MixtureError {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    MixtureError::Parse {
        line,
        message: err.to_string(),
    }
}

pub fn write_dataset_to<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=data.dim()).map(|k| format!("y_{k}")).collect();
    if data.labels().is_some() {
        header.push("z".into());
    }
    out.write_record(&header).map_err(csv_error)?;
    for (i, y) in data.observations().iter().enumerate() {
        let mut row: Vec<String> = y.iter().map(|&v| format_f64(v)).collect();
        if let Some(labels) = data.labels() {
            row.push((labels[i] + 1).to_string());
        }
        out.write_record(&row).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_dataset(data: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    write_dataset_to(data, file)
}

pub fn read_dataset_from<R: Read>(reader: R) -> Result<Dataset> {
    let mut input = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = input.headers().map_err(csv_error)?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(MixtureError::Parse {
            line: 1,
            message: "missing header".into(),
        });
    }
    let has_labels = header.iter().next_back() == Some("z");
    let dim = header.len() - usize::from(has_labels);
    for (k, name) in header.iter().take(dim).enumerate() {
        if name != format!("y_{}", k + 1) {
            return Err(MixtureError::Parse {
                line: 1,
                message: format!(
                    "missing header: expected column `y_{}`, found `{name}`",
                    k + 1
                ),
            });
        }
    }
    if dim == 0 {
        return Err(MixtureError::Parse {
            line: 1,
            message: "header has no y_ columns".into(),
        });
    }

    let mut observations = Vec::new();
    let mut labels = Vec::new();
    for record in input.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(MixtureError::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let mut y = DVector::zeros(dim);
        for k in 0..dim {
            y[k] = record[k].parse::<f64>().map_err(|e| MixtureError::Parse {
                line,
                message: format!("column y_{}: `{}`: {e}", k + 1, &record[k]),
            })?;
            if !y[k].is_finite() {
                return Err(MixtureError::Parse {
                    line,
                    message: format!("column y_{}: non-finite value", k + 1),
                });
            }
        }
        observations.push(y);
        if has_labels {
            let z: usize = record[dim].parse().map_err(|e| MixtureError::Parse {
                line,
                message: format!("column z: `{}`: {e}", &record[dim]),
            })?;
            if z == 0 {
                return Err(MixtureError::Parse {
                    line,
                    message: "column z: labels are one-based".into(),
                });
            }
            labels.push(z - 1);
        }
    }
    if observations.is_empty() {
        return Err(MixtureError::Parse {
            line: 1,
            message: "no observations".into(),
        });
    }
    Dataset::new(observations, has_labels.then_some(labels))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file =
        File::open(path).map_err(|e| MixtureError::Io(format!("{}: {e}", path.display())))?;
    read_dataset_from(file)
}
