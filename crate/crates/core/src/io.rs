//! File formats: complex matrices as nested `[re, im]` JSON arrays,
//! measurement records as CSV, reconstruction reports as JSON.
//!
//! Every float is written with 17 significant digits.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Map, Number, Value};

use crate::error::{Result, TomographyError};
use crate::operator::{ensure_finite, ComplexMatrix, Observable};
use crate::tomography::{MeasurementRecord, ReconstructionReport, TimeGrid};

/// Rows of `[re, im]` pairs.
pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

/// 17 significant digits, scientific notation.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number with 17 significant digits; `null` for non-finite values.
pub fn json_f64(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    format_f64(x).parse::<Number>().map(Value::Number).unwrap_or(Value::Null)
}

pub fn json_complex(z: Complex64) -> Value {
    Value::Array(vec![json_f64(z.re), json_f64(z.im)])
}

pub fn json_matrix(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json_complex(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(TomographyError::InvalidInput("empty matrix".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(TomographyError::InvalidInput(format!(
            "ragged matrix: row of length {} in a {ncols}-column matrix",
            bad.len()
        )));
    }
    let m = ComplexMatrix::from_fn(nrows, ncols, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
    ensure_finite(&m)?;
    Ok(m)
}

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn csv_err(e: csv::Error) -> TomographyError {
    TomographyError::Record(e.to_string())
}

/// Header `t,<label_1>,...,<label_r>`, then one row per instant.
pub fn write_record_csv<W: Write>(record: &MeasurementRecord, writer: W) -> Result<()> {
    let mut labels: Vec<&str> = record.observables().iter().map(|q| q.label.as_str()).collect();
    let mut sorted = labels.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(TomographyError::Record("observable labels must be unique".into()));
    }
    let mut w = csv::Writer::from_writer(writer);
    labels.insert(0, "t");
    w.write_record(&labels).map_err(csv_err)?;
    for (j, &t) in record.grid().instants().iter().enumerate() {
        let mut row = vec![format_f64(t)];
        row.extend((0..record.observables().len()).map(|i| format_f64(record.values()[(i, j)])));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| TomographyError::Record(e.to_string()))?;
    Ok(())
}

/// Reads a record CSV, matching header labels against `observables`.
/// Column order follows the file.
pub fn read_record_csv<R: Read>(reader: R, observables: &[Observable]) -> Result<MeasurementRecord> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers().map_err(csv_err)?.clone();
    if headers.get(0).map(str::trim) != Some("t") {
        return Err(TomographyError::Record("first column must be `t`".into()));
    }
    let mut selected = Vec::new();
    for label in headers.iter().skip(1) {
        let label = label.trim();
        let q = observables
            .iter()
            .find(|q| q.label == label)
            .ok_or_else(|| TomographyError::Record(format!("unknown observable `{label}` in record header")))?;
        selected.push(q.clone());
    }
    let mut times = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for row in r.records() {
        let row = row.map_err(csv_err)?;
        let parsed = row
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| TomographyError::Record(format!("`{s}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        times.push(parsed[0]);
        columns.push(parsed[1..].to_vec());
    }
    let grid = TimeGrid::new(times)?;
    let values = DMatrix::from_fn(selected.len(), grid.len(), |i, j| columns[j][i]);
    MeasurementRecord::new(selected, grid, values)
}

pub fn report_to_json(report: &ReconstructionReport) -> Value {
    let mut map = Map::new();
    map.insert("state".into(), json_matrix(&report.state));
    map.insert("raw_estimate".into(), json_matrix(&report.raw_estimate));
    map.insert("physical".into(), json!(report.physical));
    map.insert("min_eigenvalue".into(), json_f64(report.min_eigenvalue));
    map.insert("complete".into(), json!(report.complete));
    map.insert("span_dimension".into(), json!(report.span_dimension));
    map.insert("deficit".into(), json!(report.deficit));
    map.insert("hermitian_span_dimension".into(), json!(report.hermitian_span_dimension));
    map.insert("lambda_condition".into(), report.lambda_condition.map_or(Value::Null, json_f64));
    map.insert("design_condition".into(), json_f64(report.design_condition));
    map.insert("residual".into(), json_f64(report.residual));
    map.insert("record_residual".into(), report.record_residual.map_or(Value::Null, json_f64));
    map.insert("projected_to_density".into(), json!(report.projected_to_density));
    map.insert("warnings".into(), json!(report.warnings));
    Value::Object(map)
}
