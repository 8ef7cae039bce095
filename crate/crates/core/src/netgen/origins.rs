use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use super::network::SupplyNetwork;
use super::NetgenError;
use crate::codes::{Country, Sector};
use crate::ingest::ImportTable;
use crate::rng::{substream, Stage};
use crate::sampler::FirmList;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OriginSummary {
    pub assigned: u64,
    /// Drawn from the (sector, destination) import distribution.
    pub by_destination: u64,
    /// Fell back to the sector's imports over all destinations.
    pub sector_fallback: u64,
    /// Fell back to a uniform draw over all origins.
    pub uniform_fallback: u64,
    /// Dummies left without a buyer by the builder.
    pub unwired: u64,
}

struct Choice {
    origins: Vec<Country>,
    dist: WeightedIndex<f64>,
}

impl Choice {
    fn new(pairs: &BTreeMap<Country, f64>) -> Option<Self> {
        let (origins, w): (Vec<Country>, Vec<f64>) =
            pairs.iter().filter(|(_, &v)| v > 0.0).map(|(c, v)| (*c, *v)).unzip();
        let dist = WeightedIndex::new(w).ok()?;
        Some(Self { origins, dist })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Country {
        self.origins[self.dist.sample(rng)]
    }
}

/// Draws an origin country for every rest-of-world dummy.
///
/// The draw is proportional to imports of the dummy's sector into its buyer's
/// country. Without matching rows (or without a buyer) it falls back to the
/// sector's imports across all destinations, then to a uniform choice over
/// every origin in the table. Dummies are processed in id order from a single
/// seeded stream.
pub fn assign_import_origins(
    net: &SupplyNetwork,
    firms: &mut FirmList,
    imports: &ImportTable,
    seed: u64,
) -> Result<OriginSummary, NetgenError> {
    if net.n_nodes() != firms.len() {
        return Err(NetgenError::SizeMismatch {
            network: net.n_nodes(),
            firms: firms.len(),
        });
    }
    let mut by_dest: BTreeMap<(Sector, Country), BTreeMap<Country, f64>> = BTreeMap::new();
    let mut by_sector: BTreeMap<Sector, BTreeMap<Country, f64>> = BTreeMap::new();
    let mut all: BTreeMap<Country, f64> = BTreeMap::new();
    for (k, v) in imports.iter() {
        if v <= 0.0 {
            continue;
        }
        *by_dest.entry((k.sector, k.dest)).or_default().entry(k.origin).or_default() += v;
        *by_sector.entry(k.sector).or_default().entry(k.origin).or_default() += v;
        all.insert(k.origin, 1.0);
    }
    let uniform = Choice::new(&all).ok_or(NetgenError::EmptyImports)?;
    let by_dest: BTreeMap<_, _> = by_dest.iter().filter_map(|(k, m)| Some((*k, Choice::new(m)?))).collect();
    let by_sector: BTreeMap<_, _> =
        by_sector.iter().filter_map(|(k, m)| Some((*k, Choice::new(m)?))).collect();

    let mut rng = substream(seed, Stage::ImportOrigins, 0);
    let mut summary = OriginSummary::default();
    let mut fallback_cells: BTreeMap<String, u64> = BTreeMap::new();
    for id in 0..firms.len() as u32 {
        let firm = &firms.as_slice()[id as usize];
        if !firm.is_row_dummy {
            continue;
        }
        let sector = firm.sector;
        let buyers = net.buyers(id);
        if buyers.len() > 1 {
            return Err(NetgenError::DummyDegree {
                id,
                out_degree: buyers.len(),
            });
        }
        let dest = buyers
            .first()
            .and_then(|&b| firms.as_slice()[b as usize].country);
        if dest.is_none() {
            summary.unwired += 1;
        }
        let origin = match dest.and_then(|d| by_dest.get(&(sector, d))) {
            Some(c) => {
                summary.by_destination += 1;
                c.draw(&mut rng)
            }
            None => {
                if let Some(d) = dest {
                    *fallback_cells.entry(format!("{sector}->{d}")).or_default() += 1;
                }
                match by_sector.get(&sector) {
                    Some(c) => {
                        summary.sector_fallback += 1;
                        c.draw(&mut rng)
                    }
                    None => {
                        summary.uniform_fallback += 1;
                        uniform.draw(&mut rng)
                    }
                }
            }
        };
        firms.set_origin(id, origin);
        summary.assigned += 1;
    }
    for (cell, count) in &fallback_cells {
        log::info!("no imports for {cell}; {count} dummies used a fallback origin distribution");
    }
    if summary.uniform_fallback > 0 {
        log::warn!("{} dummies drew a uniform origin", summary.uniform_fallback);
    }
    Ok(summary)
}
