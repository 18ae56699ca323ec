//! CSV datasets and estimate tables.
//!
//! Datasets carry a header `x_1,…,x_d,y`; estimate tables carry
//! `x_1,…,x_d,g_hat,effective_count,raw_inverse` with empty cells for missing
//! values. Numbers use `.` as decimal point and Rust's shortest round-trip
//! formatting, so a write/read cycle is lossless.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::EstimateRecord;
use crate::model::Sample;

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        _ => Error::Parse { line, message: e.to_string() },
    }
}

fn coordinate_header(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x_{j}")).collect()
}

pub fn write_sample<W: Write>(sample: &Sample, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = coordinate_header(sample.dimension());
    header.push("y".into());
    w.write_record(&header).map_err(csv_error)?;
    for (x, y) in sample.iter() {
        let row: Vec<String> = x.iter().chain(std::iter::once(&y)).map(|v| v.to_string()).collect();
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sample<R: Read>(input: R) -> Result<Sample> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header = r.headers().map_err(csv_error)?.clone();
    let d = header.len().saturating_sub(1);
    if d == 0 || header.get(d) != Some("y") {
        return Err(Error::Parse { line: 1, message: "header must be x_1,...,x_d,y".into() });
    }
    for (j, name) in header.iter().take(d).enumerate() {
        if name != format!("x_{}", j + 1) {
            return Err(Error::Parse {
                line: 1,
                message: format!("column {} should be x_{}, found '{name}'", j + 1, j + 1),
            });
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != d + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", d + 1, record.len()),
            });
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse '{field}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, message: format!("non-finite value '{field}'") });
            }
            if j < d {
                xs.push(v);
            } else {
                if !(v > 0.0) {
                    return Err(Error::Parse { line, message: format!("response {v} must be positive") });
                }
                ys.push(v);
            }
        }
    }
    if ys.is_empty() {
        return Err(Error::Parse { line: 2, message: "dataset has no rows".into() });
    }
    Sample::new(d, xs, ys)
}

pub fn write_estimates<W: Write>(records: &[EstimateRecord], d: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = coordinate_header(d);
    header.extend(["g_hat", "effective_count", "raw_inverse"].map(String::from));
    w.write_record(&header).map_err(csv_error)?;
    for rec in records {
        let mut row: Vec<String> = rec.x.iter().map(|v| v.to_string()).collect();
        row.push(rec.g_hat.map(|v| v.to_string()).unwrap_or_default());
        row.push(rec.effective_count.to_string());
        row.push(rec.raw_inverse.map(|v| v.to_string()).unwrap_or_default());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_sample(path: impl AsRef<Path>) -> Result<Sample> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io(format!("cannot open {}: {e}", path.display())))?;
    read_sample(file)
}

pub fn save_sample(sample: &Sample, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))?;
    write_sample(sample, BufWriter::new(file))
}

pub fn save_estimates(records: &[EstimateRecord], d: usize, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::Io(format!("cannot create {}: {e}", path.display())))?;
    write_estimates(records, d, BufWriter::new(file))
}
