//! CSV and JSON artifacts. CSV files are UTF-8 with `.` decimals and LF
//! line ends; floats use the shortest representation that round-trips.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use diracres::error::{Error, Result};
use diracres::search::Resonance;
use serde::{Deserialize, Serialize};

/// One row of `resonances.csv` / `spectrum.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceRecord {
    pub re_lambda: f64,
    pub im_lambda: f64,
    pub multiplicity: usize,
    pub residual: f64,
    pub sheet: String,
    pub method: String,
    /// Flags joined by `;`.
    pub flags: String,
}

impl From<&Resonance> for ResonanceRecord {
    fn from(r: &Resonance) -> Self {
        ResonanceRecord {
            re_lambda: r.lambda.re,
            im_lambda: r.lambda.im,
            multiplicity: r.multiplicity,
            residual: r.residual,
            sheet: r.sheet.as_str().to_string(),
            method: r.method.as_str().to_string(),
            flags: r.flags.join(";"),
        }
    }
}

/// One row of `scattering.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringRecord {
    pub lambda: f64,
    pub re_s: f64,
    pub im_s: f64,
    pub xi: f64,
    pub unitarity_residual: f64,
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::ParseError(format!("{other:?}")),
    }
}

/// Write rows with a header line even when `rows` is empty.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(false)
        .from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub const RESONANCE_HEADER: [&str; 7] = ["re_lambda", "im_lambda", "multiplicity", "residual", "sheet", "method", "flags"];
pub const SCATTERING_HEADER: [&str; 5] = ["lambda", "re_s", "im_s", "xi", "unitarity_residual"];

pub fn write_resonances(path: &Path, zeros: &[Resonance]) -> Result<()> {
    let rows: Vec<ResonanceRecord> = zeros.iter().map(ResonanceRecord::from).collect();
    write_csv(path, &RESONANCE_HEADER, &rows)
}

pub fn write_scattering(path: &Path, rows: &[ScatteringRecord]) -> Result<()> {
    write_csv(path, &SCATTERING_HEADER, rows)
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
