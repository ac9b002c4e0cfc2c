//! Count files: CSV, one observation per row, `m >= 2` columns of
//! nonnegative integers, optional header.
//!
//! The first record is a header iff one of its fields does not parse as a
//! number.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::CountMatrix;

fn data_error(line: u64, message: impl Into<String>) -> Error {
    Error::Data {
        line,
        message: message.into(),
    }
}

fn is_header(record: &csv::StringRecord) -> bool {
    record.iter().any(|f| f.trim().parse::<f64>().is_err())
}

pub fn read_counts<R: Read>(source: R) -> Result<CountMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut width: Option<usize> = None;
    let mut counts = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        let more = reader.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            data_error(line, e.to_string())
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if std::mem::take(&mut first) && is_header(&record) {
            width = Some(record.len());
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                return Err(data_error(
                    line,
                    format!("expected {w} fields, found {}", record.len()),
                ));
            }
            _ => width = Some(record.len()),
        }
        for (j, field) in record.iter().enumerate() {
            let value = field.parse::<u64>().map_err(|_| {
                data_error(
                    line,
                    format!("field {}: {field:?} is not a nonnegative integer", j + 1),
                )
            })?;
            counts.push(value);
        }
    }
    let m = width.unwrap_or(0);
    if m < 2 {
        return Err(data_error(1, format!("need at least 2 columns, found {m}")));
    }
    if counts.is_empty() {
        return Err(data_error(1, "no observations"));
    }
    CountMatrix::from_flat(m, counts)
}

pub fn read_counts_file(path: &Path) -> Result<CountMatrix> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_counts(std::io::BufReader::new(file))
}

/// Writes a header `y1,...,ym` followed by one row per observation.
pub fn write_counts<W: Write>(data: &CountMatrix, sink: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(sink);
    let header: Vec<String> = (1..=data.m()).map(|j| format!("y{j}")).collect();
    out.write_record(&header)?;
    for row in data.rows() {
        out.write_record(row.iter().map(u64::to_string))?;
    }
    out.flush()
}

pub fn write_counts_file(data: &CountMatrix, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_counts(data, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}
