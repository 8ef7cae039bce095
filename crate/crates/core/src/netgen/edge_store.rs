//! Hash-free duplicate detection for accepted links.
//!
//! Edges live in sorted, deduplicated runs partitioned by buyer id. A batch
//! of candidate links is sorted once, split by partition and merged into each
//! run in parallel; candidates already present (or repeated inside the batch)
//! are handed back for residual refunds. Results do not depend on the number
//! of worker threads.

use rayon::prelude::*;

const PARTITION_BITS: u32 = 12;

pub(crate) struct EdgeStore {
    shift: u32,
    parts: Vec<Vec<u64>>,
    len: usize,
}

impl EdgeStore {
    pub fn new(n_nodes: usize) -> Self {
        let n_parts = (n_nodes >> PARTITION_BITS) + 1;
        Self {
            shift: 32 + PARTITION_BITS,
            parts: vec![Vec::new(); n_parts],
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Inserts a batch of edge keys, returning the rejected duplicates (one
    /// entry per rejected candidate, in ascending key order).
    pub fn insert_batch(&mut self, mut batch: Vec<u64>) -> Vec<u64> {
        if batch.is_empty() {
            return Vec::new();
        }
        batch.par_sort_unstable();
        let shift = self.shift;
        // contiguous ranges of the batch per partition
        let mut groups: Vec<(usize, usize, usize)> = Vec::new();
        let mut start = 0;
        while start < batch.len() {
            let p = (batch[start] >> shift) as usize;
            let end = start + batch[start..].partition_point(|&k| ((k >> shift) as usize) == p);
            groups.push((p, start, end));
            start = end;
        }
        let mut work: Vec<(usize, Vec<u64>, &[u64])> = groups
            .iter()
            .map(|&(p, s, e)| (p, std::mem::take(&mut self.parts[p]), &batch[s..e]))
            .collect();
        let merged: Vec<(usize, Vec<u64>, Vec<u64>, usize)> = work
            .par_iter_mut()
            .map(|(p, old, new)| {
                let (run, rejected) = merge_run(std::mem::take(old), new);
                (*p, run, rejected, new.len())
            })
            .collect();
        let mut rejected_all = Vec::new();
        for (p, run, rejected, offered) in merged {
            self.len += offered - rejected.len();
            self.parts[p] = run;
            rejected_all.extend(rejected);
        }
        rejected_all
    }

    /// All keys in ascending order.
    pub fn into_sorted(self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.len);
        for p in self.parts {
            out.extend(p);
        }
        out
    }
}

/// Merges sorted candidates (may repeat) into a sorted unique run.
fn merge_run(old: Vec<u64>, new: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let mut out = Vec::with_capacity(old.len() + new.len());
    let mut rejected = Vec::new();
    let mut i = 0;
    for &k in new {
        while i < old.len() && old[i] < k {
            out.push(old[i]);
            i += 1;
        }
        let in_old = i < old.len() && old[i] == k;
        let repeated = out.last() == Some(&k);
        if in_old || repeated {
            rejected.push(k);
        } else {
            out.push(k);
        }
    }
    out.extend_from_slice(&old[i..]);
    (out, rejected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn rejects_existing_and_repeated() {
        let mut s = EdgeStore::new(10);
        assert!(s.insert_batch(vec![5, 3, 3, 9]).iter().eq([3].iter()));
        assert_eq!(s.len(), 3);
        assert_eq!(s.insert_batch(vec![9, 1, 9]), vec![9, 9]);
        assert_eq!(s.into_sorted(), vec![1, 3, 5, 9]);
    }

    proptest! {
        #[test]
        fn equals_set_semantics(batches in prop::collection::vec(prop::collection::vec((0u32..20_000, 0u32..20_000), 0..200), 1..6)) {
            let mut store = EdgeStore::new(20_000);
            let mut set = BTreeSet::new();
            for b in batches {
                let keys: Vec<u64> = b.iter().map(|&(s, t)| super::super::network::edge_key(s, t)).collect();
                let mut expected_rejects = 0;
                for &k in &keys {
                    if !set.insert(k) { expected_rejects += 1; }
                }
                prop_assert_eq!(store.insert_batch(keys).len(), expected_rejects);
                prop_assert_eq!(store.len(), set.len());
            }
            prop_assert_eq!(store.into_sorted(), set.into_iter().collect::<Vec<_>>());
        }
    }
}
