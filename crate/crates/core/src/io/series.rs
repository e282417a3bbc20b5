//! Diagnostics time series and report tables as CSV.

use std::path::Path;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};

pub const SERIES_HEADER: [&str; 15] = [
    "t",
    "eta_total",
    "dissipation_cum",
    "balance_residual",
    "mass",
    "momentum",
    "total_energy",
    "v_min",
    "v_max",
    "theta_min",
    "theta_max",
    "psi_min",
    "psi_max",
    "h3_norm",
    "sup_perturbation",
];

/// 17 significant digits: parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn row(r: &DiagnosticsRecord<f64>) -> [f64; 15] {
    [
        r.t,
        r.eta_total,
        r.dissipation_cum,
        r.balance_residual,
        r.mass,
        r.momentum,
        r.total_energy,
        r.v_min,
        r.v_max,
        r.theta_min,
        r.theta_max,
        r.psi_min,
        r.psi_max,
        r.h3_norm,
        r.sup_perturbation,
    ]
}

fn from_row(x: [f64; 15]) -> DiagnosticsRecord<f64> {
    DiagnosticsRecord {
        t: x[0],
        eta_total: x[1],
        dissipation_cum: x[2],
        balance_residual: x[3],
        mass: x[4],
        momentum: x[5],
        total_energy: x[6],
        v_min: x[7],
        v_max: x[8],
        theta_min: x[9],
        theta_max: x[10],
        psi_min: x[11],
        psi_max: x[12],
        h3_norm: x[13],
        sup_perturbation: x[14],
    }
}

pub fn write_series(records: &[DiagnosticsRecord<f64>], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Invalid("no diagnostics records to write".into()));
    }
    let rows = records
        .iter()
        .map(|r| row(r).iter().map(|&x| fmt_f64(x)).collect())
        .collect::<Vec<Vec<String>>>();
    write_table(path, &SERIES_HEADER, &rows)
}

pub fn read_series(path: &Path) -> Result<Vec<DiagnosticsRecord<f64>>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = rdr.headers().map_err(|e| csv_err(path, e))?;
    if header.iter().ne(SERIES_HEADER.iter().copied()) {
        return Err(Error::Invalid(format!(
            "{}: unexpected header {:?}",
            path.display(),
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let mut x = [0.0; 15];
        for (k, field) in rec.iter().enumerate() {
            x[k] = field.parse().map_err(|_| {
                Error::Invalid(format!("{}: row {}: bad number {field:?}", path.display(), i + 1))
            })?;
        }
        out.push(from_row(x));
    }
    Ok(out)
}

/// Writes a header plus pre-formatted rows.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
