use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::IngestError;

/// A CSV reader that checks the header against a fixed schema and yields
/// records together with their 1-based file line numbers.
pub(crate) struct SchemaReader {
    path: PathBuf,
    inner: csv::Reader<File>,
}

pub(crate) struct Row {
    pub line: u64,
    pub record: csv::StringRecord,
}

impl SchemaReader {
    pub fn open(path: &Path, header: &[&str]) -> Result<Self, IngestError> {
        let file = File::open(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut inner = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let found = inner.headers().map_err(|e| csv_err(path, e))?.clone();
        let found_vec: Vec<&str> = found.iter().collect();
        // an empty file has no header at all; treat it as an empty table
        if !(found_vec.is_empty() || found_vec == [""]) && found_vec != header {
            return Err(IngestError::Header {
                path: path.to_path_buf(),
                expected: header.join(","),
                found: found_vec.join(","),
            });
        }
        Ok(Self {
            path: path.to_path_buf(),
            inner,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn rows(&mut self) -> impl Iterator<Item = Result<Row, IngestError>> + '_ {
        let path = self.path.clone();
        self.inner.records().map(move |r| {
            let record = r.map_err(|e| csv_err(&path, e))?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            Ok(Row { line, record })
        })
    }
}

fn csv_err(path: &Path, e: csv::Error) -> IngestError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    IngestError::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

impl Row {
    pub fn field(&self, i: usize) -> &str {
        self.record.get(i).unwrap_or("")
    }

    pub fn parse_err(&self, path: &Path, message: impl Into<String>) -> IngestError {
        IngestError::Parse {
            path: path.to_path_buf(),
            line: self.line,
            message: message.into(),
        }
    }

    pub fn schema_err(&self, path: &Path, message: impl Into<String>) -> IngestError {
        IngestError::Schema {
            path: path.to_path_buf(),
            line: self.line,
            message: message.into(),
        }
    }

    pub fn validation_err(&self, path: &Path, message: impl Into<String>) -> IngestError {
        IngestError::Validation {
            path: path.to_path_buf(),
            line: self.line,
            message: message.into(),
        }
    }

    /// Parses a coded field (country, sector, band); failures are schema errors.
    pub fn code<T>(&self, path: &Path, i: usize) -> Result<T, IngestError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.field(i)
            .parse()
            .map_err(|e: T::Err| self.schema_err(path, e.to_string()))
    }

    /// Parses an optional number; the empty string means missing.
    pub fn opt_num<T>(&self, path: &Path, i: usize) -> Result<Option<T>, IngestError>
    where
        T: FromStr,
    {
        let f = self.field(i);
        if f.is_empty() {
            return Ok(None);
        }
        f.parse()
            .map(Some)
            .map_err(|_| self.parse_err(path, format!("column {} is not a number: {f:?}", i + 1)))
    }

    pub fn num<T: FromStr>(&self, path: &Path, i: usize) -> Result<T, IngestError> {
        self.opt_num(path, i)?
            .ok_or_else(|| self.parse_err(path, format!("column {} is empty", i + 1)))
    }

    pub fn expect_len(&self, path: &Path, n: usize) -> Result<(), IngestError> {
        if self.record.len() != n {
            return Err(self.parse_err(
                path,
                format!("expected {n} fields, found {}", self.record.len()),
            ));
        }
        Ok(())
    }
}

/// Formats a float for CSV output so that parsing it back is exact.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub(crate) fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}
