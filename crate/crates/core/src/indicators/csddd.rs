use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::IndicatorError;
use crate::codes::Sector;
use crate::sampler::FirmList;

/// NACE divisions treated as high-impact by default: agriculture, forestry
/// and fishing, mining, food and beverages, textiles, apparel and leather,
/// other non-metallic minerals, basic and fabricated metals, wholesale.
pub const DEFAULT_HIGH_IMPACT: [&str; 16] = [
    "A01", "A02", "A03", "B05", "B06", "B07", "B08", "B09", "C10", "C11", "C13", "C14", "C15", "C23", "C24",
    "C25",
];
const DEFAULT_WHOLESALE: &str = "G46";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsdddThresholds {
    pub g1_employees: u32,
    /// EUR.
    pub g1_turnover: f64,
    pub g2_employees: u32,
    pub g2_turnover: f64,
    pub high_impact_sectors: BTreeSet<String>,
}

impl Default for CsdddThresholds {
    fn default() -> Self {
        Self {
            g1_employees: 500,
            g1_turnover: 150e6,
            g2_employees: 250,
            g2_turnover: 40e6,
            high_impact_sectors: DEFAULT_HIGH_IMPACT
                .iter()
                .chain([DEFAULT_WHOLESALE].iter())
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl CsdddThresholds {
    pub fn validate(&self) -> Result<BTreeSet<Sector>, IndicatorError> {
        if self.g1_employees < self.g2_employees || self.g1_turnover < self.g2_turnover {
            return Err(IndicatorError::Thresholds(
                "group 1 thresholds must not be below group 2".into(),
            ));
        }
        self.high_impact_sectors
            .iter()
            .map(|s| {
                s.parse::<Sector>()
                    .map_err(|e| IndicatorError::Thresholds(format!("high-impact sector: {e}")))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CsdddGroup {
    Group1,
    Group2,
    None,
}

impl CsdddGroup {
    pub fn is_covered(&self) -> bool {
        !matches!(self, CsdddGroup::None)
    }
}

impl fmt::Display for CsdddGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CsdddGroup::Group1 => "group1",
            CsdddGroup::Group2 => "group2",
            CsdddGroup::None => "none",
        })
    }
}

/// Directive coverage per firm. Thresholds are strict (`>`); dummies and
/// firms without employees or turnover are never covered.
pub fn classify_csddd(firms: &FirmList, thr: &CsdddThresholds) -> Result<Vec<CsdddGroup>, IndicatorError> {
    let high_impact = thr.validate()?;
    Ok(firms
        .iter()
        .map(|f| {
            let (Some(e), Some(t)) = (f.employees, f.turnover) else {
                return CsdddGroup::None;
            };
            if f.is_row_dummy {
                CsdddGroup::None
            } else if e > thr.g1_employees && t > thr.g1_turnover {
                CsdddGroup::Group1
            } else if high_impact.contains(&f.sector) && e > thr.g2_employees && t > thr.g2_turnover {
                CsdddGroup::Group2
            } else {
                CsdddGroup::None
            }
        })
        .collect())
}
