use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::csddd::CsdddGroup;
use super::IndicatorError;
use crate::codes::Sector;
use crate::netgen::SupplyNetwork;
use crate::sampler::FirmList;

/// Upstream depth of the assessment neighbourhood of covered firms.
pub const ASSESSMENT_DEPTH: u32 = 3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorMonitoring {
    pub sector: Sector,
    pub n_firms: u64,
    pub covered_firms: u64,
    pub covered_fraction: f64,
    /// Share of the sector's firms that directly supply a covered firm.
    pub tier1_supplier_fraction: f64,
    /// Supply links into the sector's covered firms.
    pub links_to_monitor: u64,
    pub links_per_covered_firm: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MonitoringReport {
    pub covered_firms: u64,
    pub group1_firms: u64,
    pub group2_firms: u64,
    /// Distinct direct suppliers of covered firms (dummies included).
    pub distinct_suppliers: u64,
    /// Direct supply links into covered firms.
    pub supply_links: u64,
    pub row_links_to_covered: u64,
    /// Distinct firms 1..=3 steps upstream of a covered firm.
    pub assessment_nodes: u64,
    /// Links whose buyer is 0..=2 steps upstream of a covered firm.
    pub assessment_links: u64,
    /// `assessment_links / assessment_nodes`: links to assess per firm.
    pub node_link_ratio: f64,
    pub sectors: Vec<SectorMonitoring>,
}

/// Monitoring burden implied by directive coverage.
pub fn monitoring_stats(
    net: &SupplyNetwork,
    firms: &FirmList,
    labels: &[CsdddGroup],
) -> Result<MonitoringReport, IndicatorError> {
    let n = net.n_nodes();
    if n != firms.len() || labels.len() != n {
        return Err(IndicatorError::SizeMismatch {
            network: n,
            nodes: firms.len().min(labels.len()),
        });
    }
    let fs = firms.as_slice();
    let covered: Vec<u32> = (0..n as u32).filter(|&i| labels[i as usize].is_covered()).collect();
    if covered.is_empty() {
        log::warn!("no firm meets the coverage thresholds; monitoring report is all zero");
    }

    let mut report = MonitoringReport {
        covered_firms: covered.len() as u64,
        group1_firms: labels.iter().filter(|&&g| g == CsdddGroup::Group1).count() as u64,
        group2_firms: labels.iter().filter(|&&g| g == CsdddGroup::Group2).count() as u64,
        ..Default::default()
    };

    let mut is_direct_supplier = vec![false; n];
    for &c in &covered {
        for &s in net.suppliers(c) {
            is_direct_supplier[s as usize] = true;
            report.supply_links += 1;
            if fs[s as usize].is_row_dummy {
                report.row_links_to_covered += 1;
            }
        }
    }
    report.distinct_suppliers = is_direct_supplier.iter().filter(|&&b| b).count() as u64;

    // multi-source upstream BFS from covered firms
    let mut dist = vec![u32::MAX; n];
    let mut queue: VecDeque<u32> = VecDeque::new();
    for &c in &covered {
        dist[c as usize] = 0;
        queue.push_back(c);
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        if du >= ASSESSMENT_DEPTH {
            continue;
        }
        report.assessment_links += net.in_degree(u) as u64;
        for &s in net.suppliers(u) {
            if dist[s as usize] == u32::MAX {
                dist[s as usize] = du + 1;
                report.assessment_nodes += 1;
                queue.push_back(s);
            }
        }
    }
    report.node_link_ratio = if report.assessment_nodes == 0 {
        0.0
    } else {
        report.assessment_links as f64 / report.assessment_nodes as f64
    };

    let mut by_sector: BTreeMap<Sector, (u64, u64, u64, u64)> = BTreeMap::new();
    for f in fs.iter().filter(|f| !f.is_row_dummy) {
        let e = by_sector.entry(f.sector).or_default();
        e.0 += 1;
        if labels[f.id as usize].is_covered() {
            e.1 += 1;
            e.3 += net.in_degree(f.id) as u64;
        }
        if is_direct_supplier[f.id as usize] {
            e.2 += 1;
        }
    }
    report.sectors = by_sector
        .into_iter()
        .map(|(sector, (n_firms, cov, sup, links))| SectorMonitoring {
            sector,
            n_firms,
            covered_firms: cov,
            covered_fraction: cov as f64 / n_firms as f64,
            tier1_supplier_fraction: sup as f64 / n_firms as f64,
            links_to_monitor: links,
            links_per_covered_firm: if cov == 0 { 0.0 } else { links as f64 / cov as f64 },
        })
        .collect();
    Ok(report)
}
