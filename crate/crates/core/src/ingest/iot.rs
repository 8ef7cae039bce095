use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use super::csvio::{fmt_f64, SchemaReader};
use super::{IngestError, LoadReport, SbsTable};
use crate::codes::{Country, CountrySector, Sector};

pub(crate) const IOT_HEADER: [&str; 5] = [
    "origin_country",
    "origin_sector",
    "dest_country",
    "dest_sector",
    "value",
];

/// Intermediate inter-industry flows between (country, sector) cells.
///
/// Rest-of-world rows are stored with [`Country::row`] as origin country.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IoTable {
    flows: BTreeMap<(CountrySector, CountrySector), f64>,
}

impl IoTable {
    /// Builds a table from flows; negative or non-finite values are rejected.
    pub fn from_flows<I>(flows: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = (CountrySector, CountrySector, f64)>,
    {
        let mut t = IoTable::default();
        for (o, d, v) in flows {
            if !(v.is_finite() && v >= 0.0) {
                return Err(IngestError::Validation {
                    path: "<memory>".into(),
                    line: 0,
                    message: format!("flow {o} -> {d} is {v}"),
                });
            }
            *t.flows.entry((o, d)).or_insert(0.0) += v;
        }
        Ok(t)
    }

    pub fn row_marker(&self) -> Country {
        Country::row()
    }

    pub fn len(&self) -> usize {
        self.flows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    pub fn flow(&self, origin: &CountrySector, dest: &CountrySector) -> f64 {
        self.flows.get(&(*origin, *dest)).copied().unwrap_or(0.0)
    }

    /// All cells in canonical (origin, destination) order.
    pub fn iter(&self) -> impl Iterator<Item = (&CountrySector, &CountrySector, f64)> {
        self.flows.iter().map(|((o, d), v)| (o, d, *v))
    }

    /// Flows whose origin is the rest-of-world marker.
    pub fn row_flows(&self) -> impl Iterator<Item = (&CountrySector, &CountrySector, f64)> {
        self.iter().filter(|(o, _, _)| o.country.is_row())
    }

    /// Total inflow into each destination sector from ROW and from everything else.
    pub fn sector_inflows(&self) -> BTreeMap<Sector, (f64, f64)> {
        let mut out: BTreeMap<Sector, (f64, f64)> = BTreeMap::new();
        for (o, d, v) in self.iter() {
            let e = out.entry(d.sector).or_insert((0.0, 0.0));
            if o.country.is_row() {
                e.0 += v;
            } else {
                e.1 += v;
            }
        }
        out
    }

    /// (country, sector) cells present in the SBS table that are missing as
    /// an origin or a destination key here.
    pub fn coverage_gaps(&self, sbs: &SbsTable) -> Vec<CountrySector> {
        let mut origins = BTreeSet::new();
        let mut dests = BTreeSet::new();
        for (o, d) in self.flows.keys() {
            origins.insert(*o);
            dests.insert(*d);
        }
        let needed: BTreeSet<CountrySector> = sbs
            .cells()
            .map(|c| CountrySector::new(c.country, c.sector))
            .collect();
        needed
            .into_iter()
            .filter(|cs| !origins.contains(cs) || !dests.contains(cs))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(IOT_HEADER)?;
        for (o, d, v) in self.iter() {
            wr.write_record([
                o.country.as_str(),
                o.sector.as_str(),
                d.country.as_str(),
                d.sector.as_str(),
                &fmt_f64(v),
            ])?;
        }
        wr.flush()
    }
}

/// Loads an input-output table. Only inter-industry cells are expected in the
/// file; duplicates are a key error and negative flows a validation error.
pub fn load_iot(path: &Path) -> Result<(IoTable, LoadReport), IngestError> {
    let mut reader = SchemaReader::open(path, &IOT_HEADER)?;
    let path = reader.path().to_path_buf();
    let mut report = LoadReport::default();
    let mut table = IoTable::default();
    for row in reader.rows() {
        let row = row?;
        report.rows_read += 1;
        row.expect_len(&path, IOT_HEADER.len())?;
        let oc: Country = row.code(&path, 0)?;
        let os: Sector = row.code(&path, 1)?;
        let dc: Country = row.code(&path, 2)?;
        let ds: Sector = row.code(&path, 3)?;
        if dc.is_row() {
            return Err(row.schema_err(&path, "rest-of-world marker is only allowed as origin"));
        }
        let v: f64 = row.num(&path, 4)?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(row.validation_err(&path, format!("negative flow {v}")));
        }
        let key = (CountrySector::new(oc, os), CountrySector::new(dc, ds));
        if table.flows.insert(key, v).is_some() {
            return Err(IngestError::DuplicateKey {
                path,
                key: format!("{} -> {}", key.0, key.1),
            });
        }
        report.rows_kept += 1;
    }
    Ok((table, report))
}
