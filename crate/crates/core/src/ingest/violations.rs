use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::csvio::SchemaReader;
use super::{IngestError, LoadReport};
use crate::codes::{Country, EuList, Sector};

pub(crate) const VIOLATIONS_HEADER: [&str; 2] = ["country", "sector"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    ChildForcedLabor,
    Lawsuits,
}

impl ViolationKind {
    pub fn label(&self) -> &'static str {
        match self {
            ViolationKind::ChildForcedLabor => "child_forced_labor",
            ViolationKind::Lawsuits => "lawsuits",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ViolationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "child_forced_labor" => Ok(ViolationKind::ChildForcedLabor),
            "lawsuits" => Ok(ViolationKind::Lawsuits),
            _ => Err(format!("unknown violation kind {s:?}")),
        }
    }
}

/// Non-EU (country, sector) cells flagged as potential human-rights violators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViolationList {
    pub kind: ViolationKind,
    entries: BTreeSet<(Country, Sector)>,
}

impl ViolationList {
    /// Builds a list, silently dropping EU countries.
    pub fn new<I>(kind: ViolationKind, entries: I, eu: &EuList) -> Self
    where
        I: IntoIterator<Item = (Country, Sector)>,
    {
        Self {
            kind,
            entries: entries.into_iter().filter(|(c, _)| !eu.contains(c)).collect(),
        }
    }

    pub fn empty(kind: ViolationKind) -> Self {
        Self {
            kind,
            entries: BTreeSet::new(),
        }
    }

    pub fn contains(&self, country: Country, sector: Sector) -> bool {
        self.entries.contains(&(country, sector))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Country, Sector)> {
        self.entries.iter()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(VIOLATIONS_HEADER)?;
        for (c, s) in &self.entries {
            wr.write_record([c.as_str(), s.as_str()])?;
        }
        wr.flush()
    }
}

/// Loads a violations list already expressed as (country, NACE sector) rows.
/// Duplicates collapse; EU rows are excluded with a warning.
pub fn load_violations(
    path: &Path,
    kind: ViolationKind,
    eu: &EuList,
) -> Result<(ViolationList, LoadReport), IngestError> {
    let mut reader = SchemaReader::open(path, &VIOLATIONS_HEADER)?;
    let path = reader.path().to_path_buf();
    let mut report = LoadReport::default();
    let mut list = ViolationList::empty(kind);
    for row in reader.rows() {
        let row = row?;
        report.rows_read += 1;
        row.expect_len(&path, VIOLATIONS_HEADER.len())?;
        let country: Country = row.code(&path, 0)?;
        let sector: Sector = row.code(&path, 1)?;
        if country.is_row() {
            return Err(row.schema_err(&path, "violations must name a concrete country"));
        }
        if eu.contains(&country) {
            report.dropped += 1;
            report.warn(format!(
                "{}: line {}: EU country {country} excluded from violations list",
                path.display(),
                row.line
            ));
            continue;
        }
        list.entries.insert((country, sector));
        report.rows_kept += 1;
    }
    Ok((list, report))
}
