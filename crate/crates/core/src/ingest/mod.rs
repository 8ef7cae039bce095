//! Loading and normalizing the external data families.
//!
//! All inputs use canonical CSV schemas (UTF-8, comma separated, `.` decimal
//! point). Each loader validates its schema, returns the in-memory table and a
//! [`LoadReport`] with row counts and non-fatal warnings.

mod concordance;
pub(crate) mod csvio;
mod imports;
mod iot;
mod sbs;
mod violations;

use std::path::PathBuf;

use thiserror::Error;

pub use concordance::{apply_concordance, ClassSystem, Concordance, ConcordanceRow, DEFAULT_CHAIN};
pub use imports::{load_imports, ImportKey, ImportTable, UnmappedPolicy};
pub use iot::{load_iot, IoTable};
pub use sbs::{load_sbs, ImputationLog, SbsCell, SbsKey, SbsTable};
pub use violations::{load_violations, ViolationKind, ViolationList};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: malformed row: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: expected header {expected:?}, found {found:?}")]
    Header {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}: line {line}: schema error: {message}")]
    Schema {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}: duplicate key {key}")]
    DuplicateKey { path: PathBuf, key: String },
    #[error("{path}: line {line}: validation error: {message}")]
    Validation {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("unmapped code {code:?} in classification {system}")]
    Unmapped { code: String, system: ClassSystem },
    #[error("concordance weights for {system} code {code:?} sum to {sum}, expected 1")]
    WeightSum {
        system: ClassSystem,
        code: String,
        sum: f64,
    },
}

/// Row accounting and non-fatal warnings from a loader.
#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct LoadReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub dropped: usize,
    pub warnings: Vec<String>,
}

impl LoadReport {
    pub(crate) fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}
