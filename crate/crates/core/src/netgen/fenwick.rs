//! Fenwick-indexed integer weights supporting O(log n) point updates and
//! weighted sampling by prefix-sum descent.

use rand::Rng;

#[derive(Clone, Debug)]
pub struct FenwickSampler {
    // 1-based partial sums
    tree: Vec<u64>,
    values: Vec<u64>,
    total: u64,
    /// Highest power of two not exceeding `len`.
    top: usize,
}

impl FenwickSampler {
    pub fn new(weights: &[u64]) -> Self {
        let n = weights.len();
        let mut tree = vec![0u64; n + 1];
        tree[1..].copy_from_slice(weights);
        for i in 1..=n {
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i];
            }
        }
        let top = if n == 0 { 0 } else { 1usize << (usize::BITS - 1 - n.leading_zeros()) };
        Self {
            tree,
            values: weights.to_vec(),
            total: weights.iter().sum(),
            top,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn get(&self, i: usize) -> u64 {
        self.values[i]
    }

    pub fn increment(&mut self, i: usize) {
        self.values[i] += 1;
        self.total += 1;
        let mut k = i + 1;
        while k < self.tree.len() {
            self.tree[k] += 1;
            k += k & k.wrapping_neg();
        }
    }

    /// Panics (debug) if the weight is already zero.
    pub fn decrement(&mut self, i: usize) {
        debug_assert!(self.values[i] > 0);
        self.values[i] -= 1;
        self.total -= 1;
        let mut k = i + 1;
        while k < self.tree.len() {
            self.tree[k] -= 1;
            k += k & k.wrapping_neg();
        }
    }

    /// Smallest index whose inclusive prefix sum exceeds `r`; `r < total`.
    pub fn find(&self, mut r: u64) -> usize {
        debug_assert!(r < self.total);
        let mut pos = 0usize;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= r {
                r -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos
    }

    /// Draws an index with probability proportional to its weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        (self.total > 0).then(|| self.find(rng.random_range(0..self.total)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn find_by_prefix() {
        let f = FenwickSampler::new(&[2, 0, 3, 1]);
        assert_eq!(f.total(), 6);
        let got: Vec<usize> = (0..6).map(|r| f.find(r)).collect();
        assert_eq!(got, vec![0, 0, 2, 2, 2, 3]);
    }

    #[test]
    fn updates() {
        let mut f = FenwickSampler::new(&[1, 1, 1]);
        f.decrement(1);
        assert_eq!((f.find(0), f.find(1)), (0, 2));
        f.decrement(0);
        f.decrement(2);
        assert_eq!(f.total(), 0);
        assert!(f.sample(&mut rand::rng()).is_none());
        f.increment(2);
        assert_eq!(f.find(0), 2);
        assert!(FenwickSampler::new(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn matches_linear_scan(weights in prop::collection::vec(0u64..20, 1..70), ops in prop::collection::vec((0usize..70, any::<bool>()), 0..50)) {
            let mut w = weights.clone();
            let mut f = FenwickSampler::new(&weights);
            for (i, inc) in ops {
                let i = i % w.len();
                if inc { w[i] += 1; f.increment(i); } else if w[i] > 0 { w[i] -= 1; f.decrement(i); }
            }
            let total: u64 = w.iter().sum();
            prop_assert_eq!(f.total(), total);
            for r in 0..total {
                // oracle: linear cumulative scan
                let mut acc = 0;
                let mut want = 0;
                for (j, &x) in w.iter().enumerate() {
                    acc += x;
                    if acc > r { want = j; break; }
                }
                prop_assert_eq!(f.find(r), want);
            }
        }
    }
}
