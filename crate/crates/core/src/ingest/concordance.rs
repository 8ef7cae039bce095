use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::csvio::{fmt_f64, SchemaReader};
use super::{IngestError, LoadReport};

pub(crate) const CONCORDANCE_HEADER: [&str; 5] = [
    "source_system",
    "source_code",
    "target_system",
    "target_code",
    "weight",
];

const WEIGHT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassSystem {
    Hs,
    Isic3,
    Isic4,
    Nace2,
}

/// HS → ISIC rev.3 → ISIC rev.4 → NACE rev.2.
pub const DEFAULT_CHAIN: [ClassSystem; 4] = [
    ClassSystem::Hs,
    ClassSystem::Isic3,
    ClassSystem::Isic4,
    ClassSystem::Nace2,
];

impl ClassSystem {
    pub fn label(&self) -> &'static str {
        match self {
            ClassSystem::Hs => "HS",
            ClassSystem::Isic3 => "ISIC3",
            ClassSystem::Isic4 => "ISIC4",
            ClassSystem::Nace2 => "NACE2",
        }
    }
}

impl fmt::Display for ClassSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ClassSystem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "HS" => Ok(ClassSystem::Hs),
            "ISIC3" => Ok(ClassSystem::Isic3),
            "ISIC4" => Ok(ClassSystem::Isic4),
            "NACE2" => Ok(ClassSystem::Nace2),
            _ => Err(format!("unknown classification system {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcordanceRow {
    pub source_system: ClassSystem,
    pub source_code: String,
    pub target_system: ClassSystem,
    pub target_code: String,
    pub weight: f64,
}

type SourceKey = (ClassSystem, String, ClassSystem);

/// Weighted code mappings between classification systems.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Concordance {
    map: BTreeMap<SourceKey, Vec<(String, f64)>>,
}

impl Concordance {
    /// Builds a concordance, checking that each source code's weights into a
    /// given target system lie in (0, 1] and sum to one.
    pub fn from_rows<I: IntoIterator<Item = ConcordanceRow>>(rows: I) -> Result<Self, IngestError> {
        let mut c = Concordance::default();
        for r in rows {
            c.map
                .entry((r.source_system, r.source_code, r.target_system))
                .or_default()
                .push((r.target_code, r.weight));
        }
        c.check()?;
        Ok(c)
    }

    fn check(&mut self) -> Result<(), IngestError> {
        for ((sys, code, _), targets) in self.map.iter_mut() {
            targets.sort_by(|a, b| a.0.cmp(&b.0));
            let sum: f64 = targets.iter().map(|t| t.1).sum();
            let bad_weight = targets.iter().any(|t| !(t.1 > 0.0 && t.1 <= 1.0));
            if bad_weight || (sum - 1.0).abs() > WEIGHT_TOL {
                return Err(IngestError::WeightSum {
                    system: *sys,
                    code: code.clone(),
                    sum,
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.map.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn targets(&self, from: ClassSystem, code: &str, to: ClassSystem) -> Option<&[(String, f64)]> {
        self.map
            .get(&(from, code.to_string(), to))
            .map(Vec::as_slice)
    }

    pub fn load(path: &Path) -> Result<(Self, LoadReport), IngestError> {
        let mut reader = SchemaReader::open(path, &CONCORDANCE_HEADER)?;
        let path = reader.path().to_path_buf();
        let mut report = LoadReport::default();
        let mut rows = Vec::new();
        for row in reader.rows() {
            let row = row?;
            report.rows_read += 1;
            row.expect_len(&path, CONCORDANCE_HEADER.len())?;
            let source_system: ClassSystem = row.code(&path, 0)?;
            let target_system: ClassSystem = row.code(&path, 2)?;
            let source_code = row.field(1).to_string();
            let target_code = row.field(3).to_string();
            if source_code.is_empty() || target_code.is_empty() {
                return Err(row.schema_err(&path, "empty code"));
            }
            let weight: f64 = row.num(&path, 4)?;
            rows.push(ConcordanceRow {
                source_system,
                source_code,
                target_system,
                target_code,
                weight,
            });
            report.rows_kept += 1;
        }
        let c = Self::from_rows(rows).map_err(|e| match e {
            IngestError::WeightSum { system, code, sum } => IngestError::Validation {
                path: path.clone(),
                line: 0,
                message: format!("weights for {system} code {code:?} sum to {sum}"),
            },
            e => e,
        })?;
        Ok((c, report))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(CONCORDANCE_HEADER)?;
        for ((from, code, to), targets) in &self.map {
            for (t, wt) in targets {
                wr.write_record([from.label(), code, to.label(), t, &fmt_f64(*wt)])?;
            }
        }
        wr.flush()
    }
}

/// Maps `code` through consecutive steps of `chain`, composing weights.
///
/// Returns the final-system codes in sorted order with weights summing to one.
pub fn apply_concordance(
    code: &str,
    chain: &[ClassSystem],
    conc: &Concordance,
) -> Result<Vec<(String, f64)>, IngestError> {
    let mut current: BTreeMap<String, f64> = BTreeMap::from([(code.to_string(), 1.0)]);
    for step in chain.windows(2) {
        let mut next: BTreeMap<String, f64> = BTreeMap::new();
        for (c, w) in &current {
            let targets = conc
                .targets(step[0], c, step[1])
                .ok_or_else(|| IngestError::Unmapped {
                    code: c.clone(),
                    system: step[0],
                })?;
            for (t, tw) in targets {
                *next.entry(t.clone()).or_insert(0.0) += w * tw;
            }
        }
        current = next;
    }
    Ok(current.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ClassSystem::*;

    fn row(from: ClassSystem, code: &str, to: ClassSystem, t: &str, w: f64) -> ConcordanceRow {
        ConcordanceRow {
            source_system: from,
            source_code: code.into(),
            target_system: to,
            target_code: t.into(),
            weight: w,
        }
    }

    fn fixture() -> Concordance {
        Concordance::from_rows([
            row(Hs, "520100", Isic3, "0111", 1.0),
            row(Isic3, "0111", Isic4, "0116", 1.0),
            row(Isic4, "0116", Nace2, "A01", 1.0),
            row(Hs, "610910", Isic3, "1810", 1.0),
            row(Isic3, "1810", Isic4, "1410", 1.0),
            row(Isic4, "1410", Nace2, "C14", 0.6),
            row(Isic4, "1410", Nace2, "C13", 0.4),
        ])
        .unwrap()
    }

    #[test]
    fn identity_chain() {
        let out = apply_concordance("520100", &DEFAULT_CHAIN, &fixture()).unwrap();
        assert_eq!(out, vec![("A01".to_string(), 1.0)]);
    }

    #[test]
    fn split_passthrough() {
        let out = apply_concordance("610910", &DEFAULT_CHAIN, &fixture()).unwrap();
        assert_eq!(out, vec![("C13".to_string(), 0.4), ("C14".to_string(), 0.6)]);
    }

    #[test]
    fn unmapped_code() {
        let err = apply_concordance("999999", &DEFAULT_CHAIN, &fixture()).unwrap_err();
        assert!(matches!(err, IngestError::Unmapped { ref code, system: Hs } if code == "999999"));
    }

    #[test]
    fn weights_must_sum_to_one() {
        let err = Concordance::from_rows([row(Hs, "1", Isic3, "a", 0.5), row(Hs, "1", Isic3, "b", 0.4)]);
        assert!(matches!(err, Err(IngestError::WeightSum { .. })));
    }

    proptest! {
        #[test]
        fn composed_weights_conserve_value(
            splits in prop::collection::vec(prop::collection::vec(1u32..100, 1..5), 1..5),
            value in 0.0f64..1e9,
        ) {
            // Each level splits every code into several children with random
            // normalized weights; the total mass must be preserved.
            let mut rows = Vec::new();
            let chain = [Hs, Isic3, Isic4, Nace2];
            let mut level_codes = vec!["root".to_string()];
            for (depth, step) in chain.windows(2).enumerate() {
                let mut next = Vec::new();
                for (ci, c) in level_codes.iter().enumerate() {
                    let parts = &splits[(ci + depth) % splits.len()];
                    let tot: u32 = parts.iter().sum();
                    let mut acc = 0.0;
                    for (k, p) in parts.iter().enumerate() {
                        let w = if k + 1 == parts.len() { 1.0 - acc } else { *p as f64 / tot as f64 };
                        acc += w;
                        let t = format!("{c}.{k}");
                        rows.push(row(step[0], c, step[1], &t, w));
                        next.push(t);
                    }
                }
                level_codes = next;
            }
            let conc = Concordance::from_rows(rows).unwrap();
            let out = apply_concordance("root", &chain, &conc).unwrap();
            let total: f64 = out.iter().map(|(_, w)| w * value).sum();
            prop_assert!((total - value).abs() <= 1e-9 * value.max(1.0));
        }
    }

    #[test]
    fn round_trip() {
        let c = fixture();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        c.write_csv(&mut f).unwrap();
        let (c2, rep) = Concordance::load(f.path()).unwrap();
        assert_eq!(rep.rows_kept, 7);
        assert_eq!(c, c2);
    }
}
