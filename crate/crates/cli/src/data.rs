//! Measurement files and output writers.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spline_inverse::io::{to_json_string, write_csv};
use spline_inverse::nalgebra::DVector;
use spline_inverse::MeasurementModel;

use crate::error::CliError;

/// JSON document `{kind, samples | pulsations + window, z, domain?}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementFile {
    #[serde(flatten)]
    pub model: MeasurementModel,
    pub z: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<f64>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn load_measurements(path: &Path) -> Result<(DVector<f64>, MeasurementModel, Option<f64>), CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let schema = |msg: String| CliError::Schema {
        path: path.to_path_buf(),
        msg,
    };
    let file: MeasurementFile = serde_json::from_str(&text).map_err(|e| schema(e.to_string()))?;
    if file.z.len() != file.model.rows() {
        return Err(schema(format!(
            "z has {} entries but the model defines {} measurements",
            file.z.len(),
            file.model.rows()
        )));
    }
    if file.z.iter().any(|v| !v.is_finite()) {
        return Err(schema("z contains non-finite values".into()));
    }
    file.model.validate(file.domain).map_err(|e| schema(e.to_string()))?;
    Ok((DVector::from_vec(file.z), file.model, file.domain))
}

pub fn save_measurements(path: &Path, file: &MeasurementFile) -> Result<(), CliError> {
    write_json(path, file)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = to_json_string(value).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e),
    })?;
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn write_columns(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<(), CliError> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    let n = columns.first().map_or(0, |c| c.len());
    let rows = (0..n).map(|i| columns.iter().map(|c| c[i]).collect());
    write_csv(BufWriter::new(f), header, rows).map_err(io_err(path))
}
