use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use super::csvio::{fmt_opt, SchemaReader};
use super::{IngestError, LoadReport};
use crate::band::SizeBand;
use crate::codes::{Country, Sector};
use crate::stats;

pub(crate) const SBS_HEADER: [&str; 6] = [
    "country",
    "sector",
    "band",
    "n_firms",
    "avg_employees",
    "turnover_per_employee",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SbsKey {
    pub country: Country,
    pub sector: Sector,
    pub band: SizeBand,
}

/// One (country, sector, size band) cell of the structural business statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct SbsCell {
    pub country: Country,
    pub sector: Sector,
    pub band: SizeBand,
    pub n_firms: u64,
    /// Employees per firm.
    pub avg_employees: Option<f64>,
    /// EUR per employee and year.
    pub turnover_per_employee: Option<f64>,
}

impl SbsCell {
    pub fn key(&self) -> SbsKey {
        SbsKey {
            country: self.country,
            sector: self.sector,
            band: self.band,
        }
    }
}

/// Cells keyed and iterated in canonical (country, sector, band) order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SbsTable {
    cells: BTreeMap<SbsKey, SbsCell>,
}

/// What [`SbsTable::impute_missing`] filled in.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct ImputationLog {
    pub avg_employees_imputed: usize,
    pub turnover_imputed: usize,
    /// Cells whose sector has no observed turnover per employee anywhere.
    pub turnover_unresolved: usize,
}

impl SbsTable {
    pub fn from_cells<I: IntoIterator<Item = SbsCell>>(cells: I) -> Result<Self, IngestError> {
        let mut t = SbsTable::default();
        for c in cells {
            let key = c.key();
            if t.cells.insert(key, c).is_some() {
                return Err(IngestError::DuplicateKey {
                    path: "<memory>".into(),
                    key: format_key(&key),
                });
            }
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = &SbsCell> {
        self.cells.values()
    }

    pub fn get(&self, key: &SbsKey) -> Option<&SbsCell> {
        self.cells.get(key)
    }

    pub fn total_firms(&self) -> u64 {
        self.cells.values().map(|c| c.n_firms).sum()
    }

    /// Fills missing averages with the band default and missing turnover per
    /// employee with the sector median across all observed cells.
    pub fn impute_missing(&mut self) -> ImputationLog {
        let mut log = ImputationLog::default();
        let mut by_sector: BTreeMap<Sector, Vec<f64>> = BTreeMap::new();
        for c in self.cells.values() {
            if let Some(t) = c.turnover_per_employee {
                by_sector.entry(c.sector).or_default().push(t);
            }
        }
        let medians: BTreeMap<Sector, f64> = by_sector
            .into_iter()
            .filter_map(|(s, v)| stats::median(&v).map(|m| (s, m)))
            .collect();
        for c in self.cells.values_mut() {
            if c.avg_employees.is_none() {
                c.avg_employees = Some(c.band.default_average());
                log.avg_employees_imputed += 1;
            }
            if c.turnover_per_employee.is_none() {
                match medians.get(&c.sector) {
                    Some(&m) => {
                        c.turnover_per_employee = Some(m);
                        log.turnover_imputed += 1;
                    }
                    None => log.turnover_unresolved += 1,
                }
            }
        }
        if log != ImputationLog::default() {
            log::info!(
                "sbs imputation: {} averages, {} turnover values, {} unresolved",
                log.avg_employees_imputed,
                log.turnover_imputed,
                log.turnover_unresolved
            );
        }
        log
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(SBS_HEADER)?;
        for c in self.cells.values() {
            wr.write_record([
                c.country.to_string(),
                c.sector.to_string(),
                c.band.label(),
                c.n_firms.to_string(),
                fmt_opt(c.avg_employees),
                fmt_opt(c.turnover_per_employee),
            ])?;
        }
        wr.flush()
    }
}

fn format_key(k: &SbsKey) -> String {
    format!("({}, {}, {})", k.country, k.sector, k.band)
}

/// Loads a structural business statistics CSV.
///
/// Rows with an empty `n_firms` are dropped and counted in the report; empty
/// averages and turnover values are kept as missing.
pub fn load_sbs(path: &Path) -> Result<(SbsTable, LoadReport), IngestError> {
    let mut reader = SchemaReader::open(path, &SBS_HEADER)?;
    let path = reader.path().to_path_buf();
    let mut report = LoadReport::default();
    let mut table = SbsTable::default();
    for row in reader.rows() {
        let row = row?;
        report.rows_read += 1;
        row.expect_len(&path, SBS_HEADER.len())?;
        let country: Country = row.code(&path, 0)?;
        let sector: Sector = row.code(&path, 1)?;
        let band: SizeBand = row.code(&path, 2)?;
        let Some(n_firms) = row.opt_num::<u64>(&path, 3)? else {
            report.dropped += 1;
            continue;
        };
        let avg_employees: Option<f64> = row.opt_num(&path, 4)?;
        let turnover_per_employee: Option<f64> = row.opt_num(&path, 5)?;
        if let Some(a) = avg_employees {
            if !a.is_finite() || !band.contains_value(a) {
                return Err(row.validation_err(
                    &path,
                    format!("avg_employees {a} outside band {band}"),
                ));
            }
        }
        if let Some(t) = turnover_per_employee {
            if !t.is_finite() || t < 0.0 {
                return Err(row.validation_err(&path, format!("negative turnover_per_employee {t}")));
            }
        }
        let cell = SbsCell {
            country,
            sector,
            band,
            n_firms,
            avg_employees,
            turnover_per_employee,
        };
        let key = cell.key();
        if table.cells.insert(key, cell).is_some() {
            return Err(IngestError::DuplicateKey {
                path,
                key: format_key(&key),
            });
        }
        report.rows_kept += 1;
    }
    if report.dropped > 0 {
        report.warn(format!(
            "{}: dropped {} of {} rows with missing n_firms",
            path.display(),
            report.dropped,
            report.rows_read
        ));
    }
    Ok((table, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "{}", SBS_HEADER.join(",")).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn maps_fields() {
        let f = file("AT,C29,10-19,120,13.5,210000\n");
        let (t, rep) = load_sbs(f.path()).unwrap();
        assert_eq!(rep.rows_kept, 1);
        let c = t.cells().next().unwrap();
        assert_eq!(c.country.as_str(), "AT");
        assert_eq!(c.sector.as_str(), "C29");
        assert_eq!(c.band, SizeBand::new(10, Some(20)).unwrap());
        assert_eq!(c.n_firms, 120);
        assert_eq!(c.avg_employees, Some(13.5));
        assert_eq!(c.turnover_per_employee, Some(210000.0));
    }

    #[test]
    fn drops_rows_missing_firm_counts() {
        let mut body = String::new();
        for (i, band) in ["0-9", "10-19", "20-49", "50-149", "150-249"].iter().enumerate() {
            for s in ["C10", "C13"] {
                let n = if i == 0 { String::new() } else { "5".into() };
                body.push_str(&format!("AT,{s},{band},{n},,\n"));
            }
        }
        let f = file(&body);
        let (t, rep) = load_sbs(f.path()).unwrap();
        assert_eq!(rep.rows_read, 10);
        assert_eq!(rep.dropped, 2);
        assert_eq!(t.len(), 8);
        assert_eq!(rep.warnings.len(), 1);
        assert!(t.cells().all(|c| c.avg_employees.is_none()));
    }

    #[test]
    fn duplicate_key_is_named() {
        let f = file("AT,C29,10-19,120,13.5,\nAT,C29,10-19,3,,\n");
        let err = load_sbs(f.path()).unwrap_err();
        match err {
            IngestError::DuplicateKey { key, .. } => assert_eq!(key, "(AT, C29, 10-19)"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn schema_and_parse_errors() {
        let f = file("AT,C29,20-50,1,,\n");
        assert!(matches!(load_sbs(f.path()), Err(IngestError::Schema { line: 2, .. })));
        let f = file("AT,C29,10-19,abc,,\n");
        assert!(matches!(load_sbs(f.path()), Err(IngestError::Parse { line: 2, .. })));
        let f = file("AT,C29,10-19,1,25,\n");
        assert!(matches!(load_sbs(f.path()), Err(IngestError::Validation { .. })));
        let f = file("AT,C29,10-19,1\n");
        assert!(matches!(load_sbs(f.path()), Err(IngestError::Parse { .. })));
    }

    #[test]
    fn imputation_defaults() {
        let f = file(
            "AT,C29,10-19,1,,100\nDE,C29,10-19,1,12,300\nFR,C29,250+,1,,\nFR,C13,0-9,2,,\n",
        );
        let (mut t, _) = load_sbs(f.path()).unwrap();
        let log = t.impute_missing();
        assert_eq!(log.avg_employees_imputed, 3);
        assert_eq!(log.turnover_imputed, 1);
        assert_eq!(log.turnover_unresolved, 1);
        let fr: Country = "FR".parse().unwrap();
        let c = t
            .cells()
            .find(|c| c.country == fr && c.sector.as_str() == "C29")
            .unwrap();
        assert_eq!(c.avg_employees, Some(375.0));
        assert_eq!(c.turnover_per_employee, Some(200.0));
    }

    #[test]
    fn round_trip() {
        let f = file("AT,C29,10-19,120,13.5,210000.25\nAT,C10,250+,4,,\nBE,A01,0-9,7,1.1,\n");
        let (t, _) = load_sbs(f.path()).unwrap();
        let mut out = tempfile::NamedTempFile::new().unwrap();
        t.write_csv(&mut out).unwrap();
        let (t2, _) = load_sbs(out.path()).unwrap();
        assert_eq!(t, t2);
    }
}
