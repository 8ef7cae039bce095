use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use serde::Serialize;

use super::edge_store::EdgeStore;
use super::fenwick::FenwickSampler;
use super::network::{edge_key, split_key, SupplyNetwork};
use super::NetgenError;
use crate::codes::CountrySector;
use crate::ingest::IoTable;
use crate::rng::{substream, Stage};
use crate::sampler::FirmList;

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    /// Stop once the global average L/N reaches this value.
    pub stop_avg_links: f64,
    /// Give up after `max_attempts_factor × target L` candidate links.
    pub max_attempts_factor: u64,
    /// Consecutive failed draws (empty pool, self-loop) before aborting.
    pub pool_empty_retries: u32,
    pub seed: u64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            stop_avg_links: 29.0,
            max_attempts_factor: 50,
            pool_empty_retries: 1000,
            seed: 0,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<(), NetgenError> {
        if !(self.stop_avg_links.is_finite() && self.stop_avg_links > 0.0) {
            return Err(NetgenError::Config(format!(
                "stop_avg_links must be positive, got {}",
                self.stop_avg_links
            )));
        }
        if self.max_attempts_factor == 0 || self.pool_empty_retries == 0 {
            return Err(NetgenError::Config(
                "max_attempts_factor and pool_empty_retries must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BuildStats {
    pub n_nodes: usize,
    pub target_links: u64,
    pub links: u64,
    /// Candidate links drawn (accepted, self-loops and duplicates).
    pub attempts: u64,
    pub self_loops: u64,
    pub duplicates: u64,
    pub empty_pool_draws: u64,
    pub wiring_pairs: usize,
    pub masked_pairs: usize,
    pub alias_rebuilds: u32,
    /// Populated cells that no positive IO flow touches.
    pub unwired_cells: Vec<String>,
    /// True when the build stopped before reaching the target density.
    pub exhausted: bool,
    pub realized_avg_degree: f64,
}

/// Nodes sharing one wiring cell, with residual-degree samplers.
struct Pool {
    members: Vec<u32>,
    out: FenwickSampler,
    inn: FenwickSampler,
}

/// Alias sampling over (origin, destination) pool pairs with lazy masking.
///
/// Masked pairs stay in the alias table and are skipped on draw; the table is
/// rebuilt from the live pairs once more than half its weight is masked.
struct PairSampler {
    weights: Vec<f64>,
    masked: Vec<bool>,
    live: Vec<usize>,
    alias: Option<WeightedAliasIndex<f64>>,
    table_weight: f64,
    masked_weight: f64,
    rebuilds: u32,
}

impl PairSampler {
    fn new(weights: Vec<f64>, masked: Vec<bool>) -> Self {
        let mut s = Self {
            weights,
            masked,
            live: Vec::new(),
            alias: None,
            table_weight: 0.0,
            masked_weight: 0.0,
            rebuilds: 0,
        };
        s.rebuild();
        s.rebuilds = 0;
        s
    }

    fn rebuild(&mut self) {
        self.live = (0..self.weights.len()).filter(|&k| !self.masked[k]).collect();
        let w: Vec<f64> = self.live.iter().map(|&k| self.weights[k]).collect();
        self.table_weight = w.iter().sum();
        self.masked_weight = 0.0;
        self.alias = if self.live.is_empty() {
            None
        } else {
            Some(WeightedAliasIndex::new(w).expect("positive finite pair weights"))
        };
        self.rebuilds += 1;
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let alias = self.alias.as_ref()?;
        loop {
            let k = self.live[alias.sample(rng)];
            if !self.masked[k] {
                return Some(k);
            }
        }
    }

    fn mask(&mut self, k: usize) {
        if self.masked[k] {
            return;
        }
        self.masked[k] = true;
        self.masked_weight += self.weights[k];
        if self.masked_weight > 0.5 * self.table_weight {
            self.rebuild();
        }
    }

    /// Unmasks pairs for which `live` holds again; rebuilds if any did.
    fn refresh(&mut self, live: impl Fn(usize) -> bool) {
        let mut changed = false;
        for k in 0..self.masked.len() {
            if self.masked[k] && live(k) {
                self.masked[k] = false;
                changed = true;
            }
        }
        if changed {
            self.rebuild();
        }
    }

    fn n_masked(&self) -> usize {
        self.masked.iter().filter(|&&m| m).count()
    }
}

/// Wires the supplier → buyer network.
///
/// Each step draws an (origin cell, destination cell) pair proportionally to
/// its IO flow (domestic diagonal flows included), then a supplier from the
/// origin pool proportionally to residual out-degree and a buyer from the
/// destination pool proportionally to residual in-degree. Self-loops are
/// rejected before any residual is touched; duplicates are detected when a
/// batch is merged into the edge store and their residuals refunded. Nodes
/// with zero residual drop out of their pool, and pairs whose pool ran dry are
/// masked. The build stops at `L ≥ ceil(stop_avg_links · N)`.
///
/// Candidate generation is sequential on one seeded stream; only the
/// merge is parallel, so the edge set does not depend on the thread count.
pub fn build_network(
    firms: &FirmList,
    iot: &IoTable,
    cfg: &BuildConfig,
) -> Result<(SupplyNetwork, BuildStats), NetgenError> {
    cfg.validate()?;
    let n = firms.len();
    if n > u32::MAX as usize {
        return Err(NetgenError::TooManyNodes(n));
    }
    let target = (cfg.stop_avg_links * n as f64).ceil() as u64;
    let mut stats = BuildStats {
        n_nodes: n,
        target_links: target,
        ..Default::default()
    };

    // pools by wiring cell, in canonical cell order
    let mut cell_members: BTreeMap<CountrySector, Vec<u32>> = BTreeMap::new();
    for f in firms.iter() {
        cell_members.entry(f.wiring_cell()).or_default().push(f.id);
    }
    let cell_index: BTreeMap<CountrySector, usize> =
        cell_members.keys().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut slot = vec![(0u32, 0u32); n];
    let mut pools: Vec<Pool> = Vec::with_capacity(cell_members.len());
    for (p, members) in cell_members.values().enumerate() {
        let out: Vec<u64> = members
            .iter()
            .map(|&id| firms.as_slice()[id as usize].k_out_target as u64)
            .collect();
        let inn: Vec<u64> = members
            .iter()
            .map(|&id| firms.as_slice()[id as usize].k_in_target as u64)
            .collect();
        for (i, &id) in members.iter().enumerate() {
            slot[id as usize] = (p as u32, i as u32);
        }
        pools.push(Pool {
            members: members.clone(),
            out: FenwickSampler::new(&out),
            inn: FenwickSampler::new(&inn),
        });
    }

    let mut pair_cells = Vec::new();
    let mut pair_weights = Vec::new();
    let mut touched = vec![false; pools.len()];
    for (o, d, v) in iot.iter() {
        if v <= 0.0 {
            continue;
        }
        if let (Some(&po), Some(&pd)) = (cell_index.get(o), cell_index.get(d)) {
            pair_cells.push((po, pd));
            pair_weights.push(v);
            touched[po] = true;
            touched[pd] = true;
        }
    }
    stats.unwired_cells = cell_index
        .iter()
        .filter(|(_, &p)| !touched[p])
        .map(|(c, _)| c.to_string())
        .collect();
    if !stats.unwired_cells.is_empty() {
        log::warn!(
            "{} populated cells have no IO flow and stay unwired: {}",
            stats.unwired_cells.len(),
            stats.unwired_cells.join(", ")
        );
    }
    stats.wiring_pairs = pair_cells.len();
    if target == 0 {
        return Ok((SupplyNetwork::from_sorted_keys(n, &[]), stats));
    }
    if pair_cells.is_empty() {
        return Err(NetgenError::NoWiringPairs);
    }
    let masked: Vec<bool> = pair_cells
        .iter()
        .map(|&(po, pd)| pools[po].out.total() == 0 || pools[pd].inn.total() == 0)
        .collect();
    let mut pairs = PairSampler::new(pair_weights, masked);

    let mut rng = substream(cfg.seed, Stage::Wiring, 0);
    let mut store = EdgeStore::new(n);
    let max_attempts = cfg.max_attempts_factor.saturating_mul(target);
    let mut consecutive = 0u32;
    let mut links = 0u64;
    let started = Instant::now();
    let mut last_log = started;

    'build: while links < target {
        if stats.attempts >= max_attempts {
            stats.exhausted = true;
            break;
        }
        let batch_size = (target / 8).max(4096).min(target - links) as usize;
        let mut batch = Vec::with_capacity(batch_size);
        let mut all_masked = false;
        while batch.len() < batch_size && stats.attempts < max_attempts {
            let Some(k) = pairs.draw(&mut rng) else {
                all_masked = true;
                break;
            };
            let (po, pd) = pair_cells[k];
            let fail = if pools[po].out.total() == 0 || pools[pd].inn.total() == 0 {
                stats.empty_pool_draws += 1;
                pairs.mask(k);
                true
            } else {
                stats.attempts += 1;
                let si = pools[po].out.sample(&mut rng).expect("nonempty pool");
                let bi = pools[pd].inn.sample(&mut rng).expect("nonempty pool");
                let s = pools[po].members[si];
                let b = pools[pd].members[bi];
                if s == b {
                    stats.self_loops += 1;
                    true
                } else {
                    pools[po].out.decrement(si);
                    pools[pd].inn.decrement(bi);
                    batch.push(edge_key(s, b));
                    false
                }
            };
            if fail {
                consecutive += 1;
                if consecutive >= cfg.pool_empty_retries {
                    return Err(NetgenError::Exhaustion {
                        consecutive,
                        links: links + batch.len() as u64,
                    });
                }
            } else {
                consecutive = 0;
            }
        }
        let rejected = store.insert_batch(batch);
        let refunded = !rejected.is_empty();
        for key in rejected {
            let (s, b) = split_key(key);
            let (ps, is) = slot[s as usize];
            let (pb, ib) = slot[b as usize];
            pools[ps as usize].out.increment(is as usize);
            pools[pb as usize].inn.increment(ib as usize);
            stats.duplicates += 1;
        }
        links = store.len() as u64;
        // pools drained by tentative picks that turned out duplicate are
        // live again
        if refunded {
            pairs.refresh(|k| {
                let (po, pd) = pair_cells[k];
                pools[po].out.total() > 0 && pools[pd].inn.total() > 0
            });
        }
        if all_masked && pairs.alias.is_none() {
            stats.exhausted = true;
        }
        if last_log.elapsed() >= Duration::from_secs(1) {
            last_log = Instant::now();
            let rejected = stats.self_loops + stats.duplicates;
            log::info!(
                "wiring: {links}/{target} links, rejection rate {:.2}%",
                100.0 * rejected as f64 / stats.attempts.max(1) as f64
            );
        }
        if stats.exhausted {
            break 'build;
        }
    }

    stats.links = links;
    stats.masked_pairs = pairs.n_masked();
    stats.alias_rebuilds = pairs.rebuilds;
    stats.realized_avg_degree = if n == 0 { 0.0 } else { links as f64 / n as f64 };
    if stats.exhausted {
        log::warn!(
            "wiring exhausted: {} links, {:.3} per node (target {})",
            links,
            stats.realized_avg_degree,
            cfg.stop_avg_links
        );
    }
    log::debug!("wiring finished in {:.2?}", started.elapsed());
    let keys = store.into_sorted();
    Ok((SupplyNetwork::from_sorted_keys(n, &keys), stats))
}
