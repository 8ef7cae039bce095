use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use super::concordance::{apply_concordance, Concordance, DEFAULT_CHAIN};
use super::csvio::{fmt_f64, SchemaReader};
use super::{IngestError, LoadReport};
use crate::codes::{Country, EuList, Sector};

pub(crate) const TRADE_HEADER: [&str; 4] = ["origin_country", "hs_code", "dest_country", "value_eur"];
pub(crate) const IMPORT_HEADER: [&str; 4] = ["origin_country", "sector", "dest_country", "value"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ImportKey {
    pub origin: Country,
    pub sector: Sector,
    pub dest: Country,
}

/// What to do with trade rows whose HS code has no concordance path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UnmappedPolicy {
    #[default]
    Error,
    SkipAndLog,
}

/// EU imports by (origin country, NACE sector, EU destination), in EUR.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ImportTable {
    rows: BTreeMap<ImportKey, f64>,
}

impl ImportTable {
    pub fn from_rows<I: IntoIterator<Item = (ImportKey, f64)>>(rows: I) -> Self {
        let mut t = ImportTable::default();
        for (k, v) in rows {
            *t.rows.entry(k).or_insert(0.0) += v;
        }
        t
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ImportKey, f64)> {
        self.rows.iter().map(|(k, v)| (k, *v))
    }

    pub fn get(&self, key: &ImportKey) -> f64 {
        self.rows.get(key).copied().unwrap_or(0.0)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(IMPORT_HEADER)?;
        for (k, v) in &self.rows {
            wr.write_record([
                k.origin.as_str(),
                k.sector.as_str(),
                k.dest.as_str(),
                &fmt_f64(*v),
            ])?;
        }
        wr.flush()
    }

    /// Reads a table previously written by [`ImportTable::write_csv`].
    pub fn load_normalized(path: &Path) -> Result<Self, IngestError> {
        let mut reader = SchemaReader::open(path, &IMPORT_HEADER)?;
        let path = reader.path().to_path_buf();
        let mut t = ImportTable::default();
        for row in reader.rows() {
            let row = row?;
            row.expect_len(&path, IMPORT_HEADER.len())?;
            let key = ImportKey {
                origin: row.code(&path, 0)?,
                sector: row.code(&path, 1)?,
                dest: row.code(&path, 2)?,
            };
            let v: f64 = row.num(&path, 3)?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(row.validation_err(&path, format!("negative value {v}")));
            }
            if t.rows.insert(key, v).is_some() {
                return Err(IngestError::DuplicateKey {
                    path,
                    key: format!("({}, {}, {})", key.origin, key.sector, key.dest),
                });
            }
        }
        Ok(t)
    }
}

/// Loads HS-coded trade flows into EU countries and converts them to NACE
/// sectors through the concordance chain, splitting values by weight and
/// aggregating per (origin, sector, destination).
pub fn load_imports(
    path: &Path,
    conc: &Concordance,
    eu: &EuList,
    policy: UnmappedPolicy,
) -> Result<(ImportTable, LoadReport), IngestError> {
    let mut reader = SchemaReader::open(path, &TRADE_HEADER)?;
    let path = reader.path().to_path_buf();
    let mut report = LoadReport::default();
    let mut table = ImportTable::default();
    let mut skipped_eu_origin = 0usize;
    for row in reader.rows() {
        let row = row?;
        report.rows_read += 1;
        row.expect_len(&path, TRADE_HEADER.len())?;
        let origin: Country = row.code(&path, 0)?;
        let hs = row.field(1);
        let dest: Country = row.code(&path, 2)?;
        let value: f64 = row.num(&path, 3)?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(row.validation_err(&path, format!("negative value {value}")));
        }
        if !eu.contains(&dest) {
            return Err(row.schema_err(&path, format!("destination {dest} is not an EU member")));
        }
        if eu.contains(&origin) || origin.is_row() {
            skipped_eu_origin += 1;
            report.dropped += 1;
            continue;
        }
        let targets = match apply_concordance(hs, &DEFAULT_CHAIN, conc) {
            Ok(t) => t,
            Err(e @ IngestError::Unmapped { .. }) => match policy {
                UnmappedPolicy::Error => return Err(e),
                UnmappedPolicy::SkipAndLog => {
                    report.dropped += 1;
                    report.warn(format!("{}: line {}: {e}; row skipped", path.display(), row.line));
                    continue;
                }
            },
            Err(e) => return Err(e),
        };
        for (code, w) in targets {
            let sector: Sector = code
                .parse()
                .map_err(|e: crate::codes::CodeError| row.schema_err(&path, e.to_string()))?;
            *table.rows.entry(ImportKey { origin, sector, dest }).or_insert(0.0) += value * w;
        }
        report.rows_kept += 1;
    }
    if skipped_eu_origin > 0 {
        report.warn(format!(
            "{}: skipped {skipped_eu_origin} rows with EU or unspecified origin",
            path.display()
        ));
    }
    if report.rows_read == 0 {
        report.warn(format!("{}: trade file is empty", path.display()));
    }
    Ok((table, report))
}

#[cfg(test)]
mod tests {
    use super::super::ConcordanceRow;
    use super::*;
    use crate::ingest::ClassSystem::*;

    fn conc() -> Concordance {
        let r = |f, c: &str, t, tc: &str, w| ConcordanceRow {
            source_system: f,
            source_code: c.into(),
            target_system: t,
            target_code: tc.into(),
            weight: w,
        };
        Concordance::from_rows([
            r(Hs, "610910", Isic3, "1810", 1.0),
            r(Isic3, "1810", Isic4, "1410", 1.0),
            r(Isic4, "1410", Nace2, "C14", 0.6),
            r(Isic4, "1410", Nace2, "C13", 0.4),
            r(Hs, "520100", Isic3, "1711", 1.0),
            r(Isic3, "1711", Isic4, "1311", 1.0),
            r(Isic4, "1311", Nace2, "C13", 1.0),
        ])
        .unwrap()
    }

    fn file(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "{}", TRADE_HEADER.join(",")).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    fn key(o: &str, s: &str, d: &str) -> ImportKey {
        ImportKey {
            origin: o.parse().unwrap(),
            sector: s.parse().unwrap(),
            dest: d.parse().unwrap(),
        }
    }

    #[test]
    fn splits_by_weight() {
        let f = file("CN,610910,DE,100\n");
        let (t, _) = load_imports(f.path(), &conc(), &EuList::default(), UnmappedPolicy::Error).unwrap();
        assert_eq!(t.len(), 2);
        assert!((t.get(&key("CN", "C14", "DE")) - 60.0).abs() < 1e-9);
        assert!((t.get(&key("CN", "C13", "DE")) - 40.0).abs() < 1e-9);
    }

    #[test]
    fn aggregates_same_key() {
        let f = file("CN,520100,DE,10\nCN,520100,DE,15\n");
        let (t, _) = load_imports(f.path(), &conc(), &EuList::default(), UnmappedPolicy::Error).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get(&key("CN", "C13", "DE")), 25.0);
    }

    #[test]
    fn empty_file_warns() {
        let f = file("");
        let (t, rep) = load_imports(f.path(), &conc(), &EuList::default(), UnmappedPolicy::Error).unwrap();
        assert!(t.is_empty());
        assert_eq!(rep.warnings.len(), 1);
        let f = tempfile::NamedTempFile::new().unwrap();
        let (t, _) = load_imports(f.path(), &conc(), &EuList::default(), UnmappedPolicy::Error).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn unmapped_and_invalid_rows() {
        let f = file("CN,000000,DE,10\n");
        let eu = EuList::default();
        assert!(matches!(
            load_imports(f.path(), &conc(), &eu, UnmappedPolicy::Error),
            Err(IngestError::Unmapped { .. })
        ));
        let (t, rep) = load_imports(f.path(), &conc(), &eu, UnmappedPolicy::SkipAndLog).unwrap();
        assert!(t.is_empty());
        assert_eq!(rep.dropped, 1);
        let f = file("CN,520100,DE,-1\n");
        assert!(matches!(
            load_imports(f.path(), &conc(), &eu, UnmappedPolicy::Error),
            Err(IngestError::Validation { .. })
        ));
        let f = file("CN,520100,US,1\n");
        assert!(matches!(
            load_imports(f.path(), &conc(), &eu, UnmappedPolicy::Error),
            Err(IngestError::Schema { .. })
        ));
    }

    #[test]
    fn normalized_round_trip() {
        let f = file("CN,610910,DE,100\nTR,520100,AT,3.25\n");
        let (t, _) = load_imports(f.path(), &conc(), &EuList::default(), UnmappedPolicy::Error).unwrap();
        let mut out = tempfile::NamedTempFile::new().unwrap();
        t.write_csv(&mut out).unwrap();
        assert_eq!(ImportTable::load_normalized(out.path()).unwrap(), t);
    }
}
