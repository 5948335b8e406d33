use std::cmp::Ordering;
use std::fmt;

/// Derivative counts `(k_1, ..., k_p)`, one slot per independent variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    counts: Vec<u32>,
}

impl MultiIndex {
    pub fn zero(p: usize) -> Self {
        MultiIndex { counts: vec![0; p] }
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        MultiIndex { counts }
    }

    /// The index with a single `1` in `slot`.
    pub fn unit(p: usize, slot: usize) -> Self {
        let mut m = Self::zero(p);
        m.counts[slot] = 1;
        m
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total order `|K|`.
    pub fn order(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.order() == 0
    }

    /// `K,i`: add one to slot `i`.
    pub fn increment(&self, slot: usize) -> Self {
        let mut m = self.clone();
        m.counts[slot] += 1;
        m
    }

    pub fn decrement(&self, slot: usize) -> Option<Self> {
        if self.counts[slot] == 0 {
            return None;
        }
        let mut m = self.clone();
        m.counts[slot] -= 1;
        Some(m)
    }

    pub fn add(&self, other: &MultiIndex) -> Self {
        MultiIndex {
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn first_nonzero_slot(&self) -> Option<usize> {
        self.counts.iter().position(|&c| c > 0)
    }

    /// Slots listed with multiplicity, e.g. `(2,1)` gives `[0,0,1]`.
    pub fn slots(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.order() as usize);
        for (i, &c) in self.counts.iter().enumerate() {
            for _ in 0..c {
                out.push(i);
            }
        }
        out
    }

    /// All multi-indices with `p` slots and `lo <= |K| <= hi`, in the total order.
    pub fn all_up_to(p: usize, lo: u32, hi: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for order in lo..=hi {
            let mut level = Vec::new();
            let mut current = vec![0u32; p];
            compositions(order, 0, &mut current, &mut level);
            level.sort();
            out.extend(level);
        }
        out
    }
}

fn compositions(remaining: u32, slot: usize, current: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if slot + 1 == current.len() {
        current[slot] = remaining;
        out.push(MultiIndex::from_counts(current.clone()));
        current[slot] = 0;
        return;
    }
    if current.is_empty() {
        return;
    }
    for k in 0..=remaining {
        current[slot] = k;
        compositions(remaining - k, slot + 1, current, out);
    }
    current[slot] = 0;
}

impl Ord for MultiIndex {
    /// By `|K|`, then lexicographically with larger leading counts first,
    /// so `(1,0)` precedes `(0,1)`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.counts.cmp(&self.counts))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_increment() {
        let k = MultiIndex::from_counts(vec![1, 2]);
        assert_eq!(k.order(), 3);
        assert_eq!(k.increment(0).counts(), &[2, 2]);
        assert_eq!(k.decrement(0).unwrap().counts(), &[0, 2]);
        assert!(MultiIndex::zero(2).decrement(1).is_none());
        assert_eq!(k.slots(), vec![0, 1, 1]);
    }

    #[test]
    fn total_order_is_graded() {
        let all = MultiIndex::all_up_to(2, 0, 2);
        let counts: Vec<_> = all.iter().map(|m| m.counts().to_vec()).collect();
        assert_eq!(
            counts,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn enumeration_counts_match_binomials() {
        // number of K with p slots and |K| <= n is C(n+p, p)
        assert_eq!(MultiIndex::all_up_to(3, 0, 2).len(), 10);
        assert_eq!(MultiIndex::all_up_to(2, 1, 3).len(), 9);
    }
}
