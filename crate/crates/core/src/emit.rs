//! CSV and JSON rendering of result tables.
//!
//! Both formats print floats as the shortest decimal that parses back to
//! the same double, so output is byte-stable and lossless.

use clap::ValueEnum;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn write_csv<T: Serialize>(headers: &[&str], rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(headers).map_err(csv_error)?;
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// A homogeneous table: CSV with the given header row, or a JSON array of
/// objects whose keys are the serialized field names.
pub fn emit_table<T: Serialize>(headers: &[&str], rows: &[T], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => write_csv(headers, rows),
        Format::Json => {
            let mut out = serde_json::to_vec(rows).map_err(|e| Error::Io(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// A single record: one-row CSV, or a bare JSON object.
pub fn emit_record<T: Serialize>(headers: &[&str], record: &T, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => write_csv(headers, std::slice::from_ref(record)),
        Format::Json => {
            let mut out = serde_json::to_vec(record).map_err(|e| Error::Io(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}
