//! Due-diligence indicators on a wired network: tier-k risk flags, exposure
//! to listed supplier cells, directive coverage and monitoring burden.

mod aggregate;
mod csddd;
mod exposure;
mod monitoring;
mod risk;

use thiserror::Error;

pub use aggregate::{aggregate_risk, GroupBy, RiskReport, RiskRow};
pub use csddd::{classify_csddd, CsdddGroup, CsdddThresholds, DEFAULT_HIGH_IMPACT};
pub use exposure::{exposure, EuGroup, ExposureCell, ExposureMatrix};
pub use monitoring::{monitoring_stats, MonitoringReport, SectorMonitoring, ASSESSMENT_DEPTH};
pub use risk::{mark_violators, risk_cumulative, risk_exact, risk_tiers, Semantics, TierRisk, ViolatorVector};

#[derive(Debug, Error, PartialEq)]
pub enum IndicatorError {
    #[error("ROW dummy {0} has no assigned import origin")]
    UnassignedOrigin(u32),
    #[error("network has {network} nodes but {nodes} node attributes were given")]
    SizeMismatch { network: usize, nodes: usize },
    #[error("unknown risk semantics {0:?} (expected exact or cumulative)")]
    UnknownSemantics(String),
    #[error("unknown grouping {0:?}")]
    UnknownGrouping(String),
    #[error("invalid coverage thresholds: {0}")]
    Thresholds(String),
}
