//! Sample-file ingestion and emission.
//!
//! The format is plain CSV: rows are observations, columns are features,
//! comma separator, decimal point, no locale handling, optionally one
//! header row. Every cell must parse as a finite real. Values are written
//! in shortest round-trip form, so write-then-read is bit-identical.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use relmmd_core::kernels::SampleSet;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: line {line}: expected {expected} fields, found {found}")]
    Ragged {
        path: String,
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("{path}: line {line}: cell {column} ({value:?}) is not a finite real")]
    BadCell {
        path: String,
        line: u64,
        column: usize,
        value: String,
    },
    #[error("{path}: {source}")]
    Malformed {
        path: String,
        source: csv::Error,
    },
    #[error("{path}: no data rows")]
    Empty { path: String },
}

/// Read a sample matrix. With `has_header` the first row is skipped.
pub fn read_sample(path: &Path, has_header: bool) -> Result<SampleSet, CsvError> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|source| CsvError::Io {
        path: display.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut data: Vec<f64> = Vec::new();
    let mut dim: Option<usize> = None;
    for record in reader.records() {
        let record = record.map_err(|source| CsvError::Malformed {
            path: display.clone(),
            source,
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let expected = *dim.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CsvError::Ragged {
                path: display,
                line,
                expected,
                found: record.len(),
            });
        }
        for (column, cell) in record.iter().enumerate() {
            let parsed: Result<f64, _> = cell.parse();
            match parsed {
                Ok(v) if v.is_finite() => data.push(v),
                _ => {
                    return Err(CsvError::BadCell {
                        path: display,
                        line,
                        column: column + 1,
                        value: cell.to_string(),
                    })
                }
            }
        }
    }
    let dim = dim.unwrap_or(0);
    if dim == 0 || data.is_empty() {
        return Err(CsvError::Empty { path: display });
    }
    Ok(SampleSet::from_flat(data, dim).expect("validated while reading"))
}

/// Write a sample matrix, one observation per line, full precision.
pub fn write_sample(path: &Path, sample: &SampleSet) -> Result<(), CsvError> {
    let display = path.display().to_string();
    let to_io = |source: std::io::Error| CsvError::Io {
        path: display.clone(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(to_io)?);
    for i in 0..sample.len() {
        let row = sample.row(i);
        let line = row
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "{line}").map_err(to_io)?;
    }
    out.flush().map_err(to_io)
}
