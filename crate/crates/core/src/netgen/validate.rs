use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use serde::Serialize;

use super::network::SupplyNetwork;
use super::NetgenError;
use crate::codes::CountrySector;
use crate::ingest::IoTable;
use crate::rng::{substream, Stage};
use crate::sampler::FirmList;
use crate::stats::spearman;

/// Complementary CDF sample: fraction of nodes with degree ≥ `degree`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CcdfPoint {
    pub degree: u64,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n_nodes: usize,
    pub n_edges: usize,
    /// Spearman correlation of IO flow and realized link count over cell
    /// pairs; absent when fewer than two pairs or either side is constant.
    pub pair_flow_correlation: Option<f64>,
    pub n_pairs: usize,
    pub in_degree_ccdf: Vec<CcdfPoint>,
    pub out_degree_ccdf: Vec<CcdfPoint>,
    /// Mean downstream shortest-path length over sampled reachable pairs.
    pub mean_path_length_estimate: Option<f64>,
    pub path_samples: usize,
    pub realized_avg_degree: f64,
    /// Spearman correlation of realized and target out-degree (firms only).
    pub out_degree_target_spearman: Option<f64>,
    pub max_out_degree: u64,
}

const CCDF_POINTS: usize = 200;
const BFS_SOURCES: usize = 64;

fn ccdf(mut degrees: Vec<u64>) -> Vec<CcdfPoint> {
    let n = degrees.len();
    if n == 0 {
        return Vec::new();
    }
    degrees.sort_unstable();
    let mut pts = Vec::new();
    let mut i = 0;
    while i < n {
        let d = degrees[i];
        pts.push(CcdfPoint {
            degree: d,
            fraction: (n - i) as f64 / n as f64,
        });
        i += degrees[i..].partition_point(|&x| x == d);
    }
    if pts.len() <= CCDF_POINTS {
        return pts;
    }
    // thin to roughly log-spaced degrees, always keeping both ends
    let last = pts.len() - 1;
    let max = pts[last].degree.max(1) as f64;
    let mut kept = Vec::with_capacity(CCDF_POINTS + 1);
    let mut next = 0.0f64;
    for (k, p) in pts.iter().enumerate() {
        let x = ((p.degree + 1) as f64).ln();
        if k == 0 || k == last || x >= next {
            kept.push(*p);
            next = x + (max + 1.0).ln() / CCDF_POINTS as f64;
        }
    }
    kept
}

/// Downstream BFS distances from `src`; `u32::MAX` marks unreachable nodes.
fn bfs(net: &SupplyNetwork, src: u32, dist: &mut [u32], queue: &mut VecDeque<u32>) -> Vec<u32> {
    dist.fill(u32::MAX);
    dist[src as usize] = 0;
    queue.clear();
    queue.push_back(src);
    let mut reached = Vec::new();
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        for &v in net.buyers(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = du + 1;
                reached.push(v);
                queue.push_back(v);
            }
        }
    }
    reached
}

fn path_length(net: &SupplyNetwork, sample_pairs: usize, seed: u64) -> (Option<f64>, usize) {
    let n = net.n_nodes();
    let sources: Vec<u32> = (0..n as u32).filter(|&i| net.out_degree(i) > 0).collect();
    if sources.is_empty() || sample_pairs == 0 {
        return (None, 0);
    }
    let mut rng = substream(seed, Stage::Validation, 0);
    let n_src = BFS_SOURCES.min(sample_pairs);
    let per_src = sample_pairs.div_ceil(n_src);
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    let (mut total, mut count) = (0u64, 0usize);
    for _ in 0..n_src {
        let src = sources[rng.random_range(0..sources.len())];
        let reached = bfs(net, src, &mut dist, &mut queue);
        if reached.is_empty() {
            continue;
        }
        for _ in 0..per_src.min(sample_pairs - count) {
            let t = reached[rng.random_range(0..reached.len())];
            total += dist[t as usize] as u64;
            count += 1;
        }
    }
    if count == 0 {
        (None, 0)
    } else {
        (Some(total as f64 / count as f64), count)
    }
}

/// Compares a built network against the IO table and the degree targets.
pub fn validate_network(
    net: &SupplyNetwork,
    firms: &FirmList,
    iot: &IoTable,
    sample_pairs: usize,
    seed: u64,
) -> Result<ValidationReport, NetgenError> {
    if net.n_nodes() != firms.len() {
        return Err(NetgenError::SizeMismatch {
            network: net.n_nodes(),
            firms: firms.len(),
        });
    }
    let cells: Vec<CountrySector> = firms.iter().map(|f| f.wiring_cell()).collect();
    let mut counts: BTreeMap<(CountrySector, CountrySector), u64> = BTreeMap::new();
    for (s, b) in net.edges() {
        *counts.entry((cells[s as usize], cells[b as usize])).or_default() += 1;
    }
    let populated: std::collections::BTreeSet<CountrySector> = cells.iter().copied().collect();
    let (mut flow, mut realized) = (Vec::new(), Vec::new());
    for (o, d, v) in iot.iter() {
        if v > 0.0 && populated.contains(o) && populated.contains(d) {
            flow.push(v);
            realized.push(counts.get(&(*o, *d)).copied().unwrap_or(0) as f64);
        }
    }
    let pair_flow_correlation = if flow.len() >= 2 { spearman(&flow, &realized) } else { None };

    let n = net.n_nodes() as u32;
    let in_deg: Vec<u64> = (0..n).map(|i| net.in_degree(i) as u64).collect();
    let out_deg: Vec<u64> = (0..n).map(|i| net.out_degree(i) as u64).collect();
    let (target, got): (Vec<f64>, Vec<f64>) = firms
        .iter()
        .filter(|f| !f.is_row_dummy)
        .map(|f| (f.k_out_target as f64, out_deg[f.id as usize] as f64))
        .unzip();
    let (mean_path_length_estimate, path_samples) = path_length(net, sample_pairs, seed);

    Ok(ValidationReport {
        n_nodes: net.n_nodes(),
        n_edges: net.n_edges(),
        pair_flow_correlation,
        n_pairs: flow.len(),
        max_out_degree: out_deg.iter().copied().max().unwrap_or(0),
        in_degree_ccdf: ccdf(in_deg),
        out_degree_ccdf: ccdf(out_deg),
        mean_path_length_estimate,
        path_samples,
        realized_avg_degree: if n == 0 { 0.0 } else { net.n_edges() as f64 / n as f64 },
        out_degree_target_spearman: spearman(&target, &got),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ccdf_steps() {
        let c = ccdf(vec![0, 1, 1, 3]);
        let pts: Vec<(u64, f64)> = c.iter().map(|p| (p.degree, p.fraction)).collect();
        assert_eq!(pts, vec![(0, 1.0), (1, 0.75), (3, 0.25)]);
        let many = ccdf((0..10_000).collect());
        assert!(many.len() <= CCDF_POINTS + 2);
        assert_eq!(many.last().unwrap().degree, 9_999);
    }

    #[test]
    fn path_length_on_chain() {
        // 0 -> 1 -> 2 -> 3: reachable pairs have lengths 1,2,3 / 1,2 / 1
        let net = SupplyNetwork::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let (est, k) = path_length(&net, 10_000, 1);
        assert!(k > 0);
        let est = est.unwrap();
        assert!((1.0..=3.0).contains(&est));
    }
}
