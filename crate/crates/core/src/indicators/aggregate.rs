use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::risk::{Semantics, TierRisk};
use super::IndicatorError;
use crate::band::SizeBand;
use crate::codes::{Country, Sector};
use crate::sampler::FirmList;

pub(crate) const RISK_HEADER: [&str; 5] = ["group_key", "tier", "semantics", "fraction", "n_firms"];

/// Grouping dimensions; with none selected the whole EU forms one group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupBy {
    pub country: bool,
    pub sector: bool,
    pub band: bool,
}

impl GroupBy {
    pub const EU: GroupBy = GroupBy {
        country: false,
        sector: false,
        band: false,
    };
    pub const COUNTRY: GroupBy = GroupBy {
        country: true,
        sector: false,
        band: false,
    };
    pub const SECTOR: GroupBy = GroupBy {
        country: false,
        sector: true,
        band: false,
    };
    pub const BAND: GroupBy = GroupBy {
        country: false,
        sector: false,
        band: true,
    };

    /// Group key for one firm: selected fields joined by `:`, or `EU`.
    fn key(&self, country: Country, sector: Sector, band: Option<SizeBand>) -> String {
        let mut parts = Vec::with_capacity(3);
        if self.country {
            parts.push(country.to_string());
        }
        if self.sector {
            parts.push(sector.to_string());
        }
        if self.band {
            parts.push(band.map(|b| b.label()).unwrap_or_default());
        }
        if parts.is_empty() {
            "EU".to_string()
        } else {
            parts.join(":")
        }
    }
}

impl fmt::Display for GroupBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.country {
            parts.push("country");
        }
        if self.sector {
            parts.push("sector");
        }
        if self.band {
            parts.push("band");
        }
        if parts.is_empty() {
            f.write_str("eu")
        } else {
            f.write_str(&parts.join("+"))
        }
    }
}

impl FromStr for GroupBy {
    type Err = IndicatorError;

    /// Parses `eu` or a `+`-separated subset of `country`, `sector`, `band`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut g = GroupBy::default();
        if s == "eu" {
            return Ok(g);
        }
        for part in s.split('+') {
            match part.trim() {
                "country" => g.country = true,
                "sector" => g.sector = true,
                "band" => g.band = true,
                _ => return Err(IndicatorError::UnknownGrouping(s.to_string())),
            }
        }
        Ok(g)
    }
}

impl Serialize for GroupBy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupBy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RiskRow {
    pub group_key: String,
    pub tier: u32,
    pub semantics: Semantics,
    pub fraction: f64,
    pub n_firms: u64,
}

/// Share of flagged firms per group, over EU firms only (dummies excluded).
pub fn aggregate_risk(risk: &TierRisk, firms: &FirmList, group_by: GroupBy) -> Result<Vec<RiskRow>, IndicatorError> {
    if risk.flags.len() != firms.len() {
        return Err(IndicatorError::SizeMismatch {
            network: risk.flags.len(),
            nodes: firms.len(),
        });
    }
    let mut groups: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for f in firms.iter().filter(|f| !f.is_row_dummy) {
        let Some(country) = f.country else { continue };
        let e = groups.entry(group_by.key(country, f.sector, f.band)).or_default();
        e.1 += 1;
        if risk.flags[f.id as usize] {
            e.0 += 1;
        }
    }
    if groups.is_empty() {
        log::warn!("no EU firms to aggregate by {group_by}");
    }
    Ok(groups
        .into_iter()
        .map(|(group_key, (flagged, n))| RiskRow {
            group_key,
            tier: risk.k,
            semantics: risk.semantics,
            fraction: flagged as f64 / n as f64,
            n_firms: n,
        })
        .collect())
}

/// Rows for several tiers and groupings, in (grouping, group, semantics, tier)
/// order.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RiskReport {
    pub rows: Vec<RiskRow>,
}

impl RiskReport {
    pub fn build(risks: &[TierRisk], firms: &FirmList, groupings: &[GroupBy]) -> Result<Self, IndicatorError> {
        let mut rows = Vec::new();
        for g in groupings {
            let mut block = Vec::new();
            for r in risks {
                block.extend(aggregate_risk(r, firms, *g)?);
            }
            block.sort_by(|a, b| {
                (&a.group_key, a.semantics, a.tier).cmp(&(&b.group_key, b.semantics, b.tier))
            });
            rows.extend(block);
        }
        Ok(Self { rows })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(RISK_HEADER)?;
        for r in &self.rows {
            wr.write_record([
                r.group_key.clone(),
                r.tier.to_string(),
                r.semantics.to_string(),
                format!("{}", r.fraction),
                r.n_firms.to_string(),
            ])?;
        }
        wr.flush()
    }
}
