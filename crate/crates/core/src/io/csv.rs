use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};

pub const SNAPSHOT_HEADER: &[&str] = &["t", "x", "u1", "u2", "u3"];
pub const SYNC_HEADER: &[&str] =
    &["t", "x", "u1", "u2", "u3", "v1", "v2", "v3", "e1", "e2", "e3", "V"];
pub const ODE_HEADER: &[&str] = &["t", "u1", "u2", "u3"];
pub const ERROR_NORM_HEADER: &[&str] = &["t", "l2", "sup", "V"];
pub const EQUILIBRIA_HEADER: &[&str] = &["index", "u1", "u2", "u3", "residual"];
pub const STABILITY_HEADER: &[&str] = &["index", "u1", "u2", "u3", "worst_arg", "margin"];
pub const VERDICT_HEADER: &[&str] = &[
    "index", "d1", "d2", "d3", "rational_orders", "method", "stable", "min_abs_arg", "threshold",
];
pub const MODE_HEADER: &[&str] = &[
    "mode", "lambda", "discriminant", "xi1_re", "xi1_im", "xi2_re", "xi2_im", "xi3", "abs_arg",
    "checked", "satisfied",
];

/// 17 significant digits; parses back to the identical double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct CsvWriter {
    out: ::csv::Writer<File>,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let mut out = ::csv::Writer::from_path(path).map_err(csv_error)?;
        out.write_record(header).map_err(csv_error)?;
        Ok(Self { out })
    }

    pub fn numbers(&mut self, values: &[f64]) -> Result<()> {
        self.out.write_record(values.iter().map(|v| fmt_f64(*v))).map_err(csv_error)
    }

    pub fn record(&mut self, cells: &[String]) -> Result<()> {
        self.out.write_record(cells).map_err(csv_error)
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

fn csv_error(e: ::csv::Error) -> Error {
    match e.into_kind() {
        ::csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse { key: "<csv>".into(), message: format!("{other:?}") },
    }
}

/// A parsed table; cells are kept as text.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .column_index(name)
            .ok_or_else(|| Error::Parse { key: name.into(), message: "no such column".into() })?;
        self.rows
            .iter()
            .map(|r| {
                r[i].parse::<f64>().map_err(|e| Error::Parse {
                    key: name.into(),
                    message: format!("{}: {e}", r[i]),
                })
            })
            .collect()
    }
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let mut reader = ::csv::Reader::from_path(path).map_err(csv_error)?;
    let header = reader.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()).map_err(csv_error))
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok(Table { header, rows })
}
