use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::IndicatorError;
use crate::band::SizeBand;
use crate::codes::{Country, Sector};
use crate::ingest::ViolationList;
use crate::netgen::SupplyNetwork;
use crate::sampler::FirmList;

pub(crate) const EXPOSURE_HEADER: [&str; 7] = [
    "eu_country",
    "eu_sector",
    "band",
    "viol_country",
    "viol_sector",
    "links",
    "share",
];

/// An EU group: (country, sector) and optionally a size band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EuGroup {
    pub country: Country,
    pub sector: Sector,
    pub band: Option<SizeBand>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExposureCell {
    pub viol_country: Country,
    pub viol_sector: Sector,
    pub links: u64,
    pub share: f64,
}

/// Supply links from listed (country, sector) cells into EU groups.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExposureMatrix {
    rows: BTreeMap<EuGroup, Vec<ExposureCell>>,
}

impl ExposureMatrix {
    /// Columns of one group; empty when the group has no listed suppliers.
    pub fn row(&self, group: &EuGroup) -> &[ExposureCell] {
        self.rows.get(group).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn rows(&self) -> impl Iterator<Item = (&EuGroup, &[ExposureCell])> {
        self.rows.iter().map(|(g, v)| (g, v.as_slice()))
    }

    pub fn total_links(&self) -> u64 {
        self.rows.values().flatten().map(|c| c.links).sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(EXPOSURE_HEADER)?;
        for (g, cells) in &self.rows {
            for c in cells {
                wr.write_record([
                    g.country.to_string(),
                    g.sector.to_string(),
                    g.band.map(|b| b.label()).unwrap_or_default(),
                    c.viol_country.to_string(),
                    c.viol_sector.to_string(),
                    c.links.to_string(),
                    format!("{}", c.share),
                ])?;
            }
        }
        wr.flush()
    }
}

/// Counts edges from listed dummy suppliers into EU firms, keyed by the
/// buyer's (country, sector[, band]) and the supplier's (origin, sector).
pub fn exposure(
    net: &SupplyNetwork,
    firms: &FirmList,
    viol: &ViolationList,
    by_band: bool,
) -> Result<ExposureMatrix, IndicatorError> {
    if net.n_nodes() != firms.len() {
        return Err(IndicatorError::SizeMismatch {
            network: net.n_nodes(),
            nodes: firms.len(),
        });
    }
    let fs = firms.as_slice();
    let mut counts: BTreeMap<EuGroup, BTreeMap<(Country, Sector), u64>> = BTreeMap::new();
    for s in fs.iter().filter(|f| f.is_row_dummy) {
        let origin = s.country.ok_or(IndicatorError::UnassignedOrigin(s.id))?;
        if !viol.contains(origin, s.sector) {
            continue;
        }
        for &b in net.buyers(s.id) {
            let buyer = &fs[b as usize];
            if buyer.is_row_dummy {
                continue;
            }
            let Some(country) = buyer.country else { continue };
            let g = EuGroup {
                country,
                sector: buyer.sector,
                band: if by_band { buyer.band } else { None },
            };
            *counts.entry(g).or_default().entry((origin, s.sector)).or_default() += 1;
        }
    }
    let rows = counts
        .into_iter()
        .map(|(g, cols)| {
            let total: u64 = cols.values().sum();
            let cells = cols
                .into_iter()
                .map(|((c, s), links)| ExposureCell {
                    viol_country: c,
                    viol_sector: s,
                    links,
                    share: links as f64 / total as f64,
                })
                .collect();
            (g, cells)
        })
        .collect();
    Ok(ExposureMatrix { rows })
}
