//! Directed supplier → buyer network in compressed sparse row form.

use rayon::prelude::*;

use super::NetgenError;

/// Unweighted directed network with both traversal directions.
///
/// `suppliers(i)` lists the `j` with an edge `j → i` (row `i` of the
/// buyer-by-supplier incidence `A`); `buyers(j)` is its transpose. Both lists
/// are sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupplyNetwork {
    n_nodes: usize,
    in_offsets: Vec<u64>,
    in_suppliers: Vec<u32>,
    out_offsets: Vec<u64>,
    out_buyers: Vec<u32>,
}

/// Packs an edge as `buyer << 32 | supplier`, so that sorting keys orders
/// edges by buyer, then supplier.
#[inline]
pub(crate) fn edge_key(supplier: u32, buyer: u32) -> u64 {
    ((buyer as u64) << 32) | supplier as u64
}

#[inline]
pub(crate) fn split_key(key: u64) -> (u32, u32) {
    (key as u32, (key >> 32) as u32)
}

impl SupplyNetwork {
    /// Builds from strictly increasing edge keys (no duplicates).
    pub(crate) fn from_sorted_keys(n_nodes: usize, keys: &[u64]) -> Self {
        debug_assert!(keys.windows(2).all(|w| w[0] < w[1]));
        let mut in_offsets = vec![0u64; n_nodes + 1];
        let mut out_counts = vec![0u64; n_nodes + 1];
        for &k in keys {
            let (s, b) = split_key(k);
            in_offsets[b as usize + 1] += 1;
            out_counts[s as usize + 1] += 1;
        }
        for i in 0..n_nodes {
            in_offsets[i + 1] += in_offsets[i];
            out_counts[i + 1] += out_counts[i];
        }
        let in_suppliers: Vec<u32> = keys.par_iter().map(|&k| k as u32).collect();
        let out_offsets = out_counts.clone();
        let mut cursor = out_counts;
        let mut out_buyers = vec![0u32; keys.len()];
        // keys are buyer-major, so each supplier's buyers arrive in ascending order
        for &k in keys {
            let (s, b) = split_key(k);
            out_buyers[cursor[s as usize] as usize] = b;
            cursor[s as usize] += 1;
        }
        Self {
            n_nodes,
            in_offsets,
            in_suppliers,
            out_offsets,
            out_buyers,
        }
    }

    /// Builds from arbitrary `(supplier, buyer)` pairs; rejects self-loops,
    /// out-of-range ids and duplicates.
    pub fn from_edges<I>(n_nodes: usize, edges: I) -> Result<Self, NetgenError>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        if n_nodes > u32::MAX as usize {
            return Err(NetgenError::TooManyNodes(n_nodes));
        }
        let mut keys = Vec::new();
        for (s, b) in edges {
            if s as usize >= n_nodes || b as usize >= n_nodes {
                return Err(NetgenError::NodeOutOfRange { supplier: s, buyer: b, n_nodes });
            }
            if s == b {
                return Err(NetgenError::SelfLoop(s));
            }
            keys.push(edge_key(s, b));
        }
        keys.par_sort_unstable();
        if let Some(w) = keys.windows(2).find(|w| w[0] == w[1]) {
            let (s, b) = split_key(w[0]);
            return Err(NetgenError::DuplicateEdge { supplier: s, buyer: b });
        }
        Ok(Self::from_sorted_keys(n_nodes, &keys))
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.in_suppliers.len()
    }

    pub fn suppliers(&self, buyer: u32) -> &[u32] {
        let b = buyer as usize;
        &self.in_suppliers[self.in_offsets[b] as usize..self.in_offsets[b + 1] as usize]
    }

    pub fn buyers(&self, supplier: u32) -> &[u32] {
        let s = supplier as usize;
        &self.out_buyers[self.out_offsets[s] as usize..self.out_offsets[s + 1] as usize]
    }

    pub fn in_degree(&self, node: u32) -> usize {
        self.suppliers(node).len()
    }

    pub fn out_degree(&self, node: u32) -> usize {
        self.buyers(node).len()
    }

    /// `(supplier, buyer)` pairs sorted by buyer, then supplier.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n_nodes as u32).flat_map(move |b| self.suppliers(b).iter().map(move |&s| (s, b)))
    }

    /// Checks sortedness, absence of self-loops and duplicates, and that the
    /// forward index is the exact transpose of the reverse index.
    pub fn check_invariants(&self) -> Result<(), NetgenError> {
        let mut out_count = vec![0usize; self.n_nodes];
        for b in 0..self.n_nodes as u32 {
            let sup = self.suppliers(b);
            for (k, &s) in sup.iter().enumerate() {
                if s == b {
                    return Err(NetgenError::SelfLoop(b));
                }
                if k > 0 && sup[k - 1] >= s {
                    return Err(NetgenError::DuplicateEdge { supplier: s, buyer: b });
                }
                if self.buyers(s).binary_search(&b).is_err() {
                    return Err(NetgenError::Transpose { supplier: s, buyer: b });
                }
                out_count[s as usize] += 1;
            }
        }
        for s in 0..self.n_nodes as u32 {
            if self.out_degree(s) != out_count[s as usize] {
                return Err(NetgenError::Transpose { supplier: s, buyer: u32::MAX });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_directions() {
        let net = SupplyNetwork::from_edges(4, [(0, 1), (2, 1), (1, 3), (0, 3)]).unwrap();
        assert_eq!(net.n_edges(), 4);
        assert_eq!(net.suppliers(1), &[0, 2]);
        assert_eq!(net.suppliers(3), &[0, 1]);
        assert_eq!(net.buyers(0), &[1, 3]);
        assert_eq!(net.buyers(3), &[] as &[u32]);
        assert_eq!(net.edges().collect::<Vec<_>>(), vec![(0, 1), (2, 1), (0, 3), (1, 3)]);
        net.check_invariants().unwrap();
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(SupplyNetwork::from_edges(3, [(1, 1)]), Err(NetgenError::SelfLoop(1))));
        assert!(matches!(
            SupplyNetwork::from_edges(3, [(0, 1), (0, 1)]),
            Err(NetgenError::DuplicateEdge { .. })
        ));
        assert!(matches!(
            SupplyNetwork::from_edges(3, [(0, 3)]),
            Err(NetgenError::NodeOutOfRange { .. })
        ));
    }
}
