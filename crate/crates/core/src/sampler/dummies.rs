use std::collections::{BTreeMap, BTreeSet};

use super::firms::{Firm, FirmList};
use super::SamplerError;
use crate::codes::{Country, Sector};
use crate::ingest::IoTable;

/// Handling of a destination sector that receives ROW inflow but no
/// non-ROW inflow, which makes the dummy-count ratio undefined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DegenerateRatioPolicy {
    #[default]
    Error,
    SkipWithWarning,
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct DummySummary {
    /// Dummies attributed to each destination sector.
    pub per_dest_sector: BTreeMap<Sector, u64>,
    /// Dummies created per supplying (ROW origin) sector.
    pub per_origin_sector: BTreeMap<Sector, u64>,
    pub total: u64,
    /// Sum of in-degree targets over the non-dummy firms.
    pub eu_in_links: u64,
    pub skipped_sectors: Vec<Sector>,
}

impl DummySummary {
    /// Dummy count relative to the EU in-link targets.
    pub fn import_link_share(&self) -> f64 {
        if self.eu_in_links == 0 {
            0.0
        } else {
            self.total as f64 / self.eu_in_links as f64
        }
    }
}

/// Splits `n` into integer parts proportional to `weights` (largest remainder,
/// ties to the earlier entry).
fn apportion(n: u64, weights: &[f64]) -> Vec<u64> {
    let total: f64 = weights.iter().sum();
    if n == 0 || total <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut parts: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = parts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take((n - assigned) as usize) {
        parts[i] += 1;
    }
    parts
}

/// Appends rest-of-world dummy suppliers.
///
/// For each destination sector `s` the count is
/// `round(Σ_EU k_in(s) · ROW inflow(s) / non-ROW inflow(s))`, using the
/// rounded in-degree targets. Each dummy stands for one import link, so the
/// count is apportioned over the ROW supplying sectors `s'` by their flow
/// into `s`; a dummy carries its supplying sector, `k_out = 1`, `k_in = 0` and
/// no country until import origins are assigned. Only flows into countries
/// that have firms are counted.
pub fn make_row_dummies(
    firms: &mut FirmList,
    iot: &IoTable,
    policy: DegenerateRatioPolicy,
) -> Result<DummySummary, SamplerError> {
    let countries: BTreeSet<Country> = firms
        .iter()
        .filter(|f| !f.is_row_dummy)
        .filter_map(|f| f.country)
        .collect();
    let mut k_in: BTreeMap<Sector, u64> = BTreeMap::new();
    for f in firms.iter().filter(|f| !f.is_row_dummy) {
        *k_in.entry(f.sector).or_default() += f.k_in_target as u64;
    }

    // dest sector -> (row inflow, non-row inflow, row inflow by supplying sector)
    let mut inflow: BTreeMap<Sector, (f64, f64, BTreeMap<Sector, f64>)> = BTreeMap::new();
    for (o, d, v) in iot.iter() {
        if !countries.contains(&d.country) {
            continue;
        }
        let e = inflow.entry(d.sector).or_default();
        if o.country.is_row() {
            e.0 += v;
            *e.2.entry(o.sector).or_default() += v;
        } else {
            e.1 += v;
        }
    }

    let mut summary = DummySummary {
        eu_in_links: k_in.values().sum(),
        ..Default::default()
    };
    let mut new_dummies: Vec<(Sector, u64)> = Vec::new();
    for (sector, (row, non_row, by_origin)) in &inflow {
        if *row <= 0.0 {
            continue;
        }
        if *non_row <= 0.0 {
            match policy {
                DegenerateRatioPolicy::Error => {
                    return Err(SamplerError::DegenerateRatio {
                        sector: *sector,
                        row_inflow: *row,
                    })
                }
                DegenerateRatioPolicy::SkipWithWarning => {
                    log::warn!("sector {sector}: ROW inflow without domestic inflow, no dummies added");
                    summary.skipped_sectors.push(*sector);
                    continue;
                }
            }
        }
        let sum_k = k_in.get(sector).copied().unwrap_or(0);
        let n = (sum_k as f64 * row / non_row).round() as u64;
        if n == 0 {
            continue;
        }
        summary.per_dest_sector.insert(*sector, n);
        let origins: Vec<Sector> = by_origin.keys().copied().collect();
        let weights: Vec<f64> = by_origin.values().copied().collect();
        for (s, k) in origins.into_iter().zip(apportion(n, &weights)) {
            if k > 0 {
                new_dummies.push((s, k));
            }
        }
    }

    for (sector, k) in new_dummies {
        for _ in 0..k {
            if firms.len() >= u32::MAX as usize {
                return Err(SamplerError::TooManyFirms(firms.len()));
            }
            firms.push(Firm {
                id: 0,
                country: None,
                sector,
                band: None,
                employees: None,
                turnover: None,
                k_out_target: 1,
                k_in_target: 0,
                is_row_dummy: true,
            });
        }
        *summary.per_origin_sector.entry(sector).or_default() += k;
        summary.total += k;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::CountrySector;

    fn cs(c: &str, s: &str) -> CountrySector {
        CountrySector::new(c.parse().unwrap(), s.parse().unwrap())
    }

    fn firms_with_kin(sector: &str, total: u32, n: u32) -> FirmList {
        let mut l = FirmList::new();
        for i in 0..n {
            let k = total / n + u32::from(i < total % n);
            l.push(Firm {
                id: 0,
                country: Some("AT".parse().unwrap()),
                sector: sector.parse().unwrap(),
                band: None,
                employees: Some(1),
                turnover: Some(1.0),
                k_out_target: 1,
                k_in_target: k,
                is_row_dummy: false,
            });
        }
        l
    }

    #[test]
    fn zero_row_inflow() {
        let mut firms = firms_with_kin("C10", 1000, 10);
        let iot = IoTable::from_flows([(cs("AT", "C10"), cs("AT", "C10"), 5.0)]).unwrap();
        let s = make_row_dummies(&mut firms, &iot, Default::default()).unwrap();
        assert_eq!(s.total, 0);
        assert_eq!(firms.len(), 10);
    }

    #[test]
    fn ratio_one_gives_sum_kin() {
        let mut firms = firms_with_kin("C10", 1000, 10);
        let iot = IoTable::from_flows([
            (cs("AT", "C10"), cs("AT", "C10"), 5.0),
            (cs("ROW", "C10"), cs("AT", "C10"), 3.0),
            (cs("ROW", "C13"), cs("AT", "C10"), 2.0),
        ])
        .unwrap();
        let s = make_row_dummies(&mut firms, &iot, Default::default()).unwrap();
        assert_eq!(s.total, 1000);
        assert_eq!(firms.len(), 1010);
        assert_eq!(s.per_origin_sector[&"C10".parse().unwrap()], 600);
        assert_eq!(s.per_origin_sector[&"C13".parse().unwrap()], 400);
        for d in firms.iter().skip(10) {
            assert!(d.is_row_dummy && d.country.is_none());
            assert_eq!((d.k_out_target, d.k_in_target), (1, 0));
            assert!(d.employees.is_none() && d.band.is_none() && d.turnover.is_none());
        }
    }

    #[test]
    fn import_share_matches_ratio() {
        let mut firms = firms_with_kin("C10", 56_000, 1000);
        let iot = IoTable::from_flows([
            (cs("AT", "C10"), cs("AT", "C10"), 100.0),
            (cs("ROW", "C10"), cs("AT", "C10"), 13.0),
        ])
        .unwrap();
        let s = make_row_dummies(&mut firms, &iot, Default::default()).unwrap();
        assert!((s.import_link_share() - 0.13).abs() < 1e-3);
    }

    #[test]
    fn degenerate_ratio() {
        let mut firms = firms_with_kin("C10", 10, 1);
        let iot = IoTable::from_flows([(cs("ROW", "C10"), cs("AT", "C10"), 3.0)]).unwrap();
        assert!(matches!(
            make_row_dummies(&mut firms, &iot, DegenerateRatioPolicy::Error),
            Err(SamplerError::DegenerateRatio { .. })
        ));
        let s = make_row_dummies(&mut firms, &iot, DegenerateRatioPolicy::SkipWithWarning).unwrap();
        assert_eq!(s.total, 0);
        assert_eq!(s.skipped_sectors.len(), 1);
    }

    #[test]
    fn apportion_is_exact() {
        assert_eq!(apportion(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(apportion(0, &[1.0]), vec![0]);
        assert_eq!(apportion(7, &[0.0, 2.0]), vec![0, 7]);
    }
}
