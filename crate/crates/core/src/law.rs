//! Exact finite laws over bond configurations encoded as edge bit masks.

use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// Largest edge count for which configurations fit in a mask.
pub const MAX_MASK_EDGES: usize = 64;

/// A normalized distribution over subsets of `0..num_edges`, stored sparsely
/// and sorted by mask.
#[derive(Clone, Debug)]
pub struct ExactLaw {
    num_edges: usize,
    entries: Vec<(u64, f64)>,
}

impl ExactLaw {
    /// Normalizes nonnegative weights; zero-weight masks are dropped.
    pub fn from_weights(num_edges: usize, weights: impl IntoIterator<Item = (u64, f64)>) -> Result<Self> {
        if num_edges > MAX_MASK_EDGES {
            return Err(Error::Size { what: "edge mask", needed: num_edges, budget: MAX_MASK_EDGES });
        }
        let mut entries: Vec<(u64, f64)> = weights.into_iter().filter(|&(_, w)| w > 0.0).collect();
        entries.sort_by_key(|&(m, _)| m);
        entries.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let total: KahanSum = entries.iter().map(|&(_, w)| w).collect();
        let z = total.value();
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Contract("law has no mass".into()));
        }
        for (_, w) in &mut entries {
            *w /= z;
        }
        Ok(Self { num_edges, entries })
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn prob_of(&self, mask: u64) -> f64 {
        match self.entries.binary_search_by_key(&mask, |&(m, _)| m) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn prob<F: Fn(u64) -> bool>(&self, event: F) -> f64 {
        let s: KahanSum = self.entries.iter().filter(|&&(m, _)| event(m)).map(|&(_, w)| w).collect();
        s.value()
    }

    pub fn expectation<F: Fn(u64) -> f64>(&self, f: F) -> f64 {
        let s: KahanSum = self.entries.iter().map(|&(m, w)| w * f(m)).collect();
        s.value()
    }

    /// Law conditioned on an event; `None` when the event has probability 0.
    pub fn condition<F: Fn(u64) -> bool>(&self, event: F) -> Option<ExactLaw> {
        let kept: Vec<(u64, f64)> = self.entries.iter().copied().filter(|&(m, _)| event(m)).collect();
        ExactLaw::from_weights(self.num_edges, kept).ok()
    }

    /// Per-edge probability of being open.
    pub fn edge_marginals(&self) -> Vec<f64> {
        (0..self.num_edges).map(|e| self.prob(|m| m >> e & 1 == 1)).collect()
    }

    /// Total-variation distance `½ Σ |p − q|`.
    pub fn tv_distance(&self, other: &ExactLaw) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut s = KahanSum::new();
        while i < a.len() || j < b.len() {
            let ka = a.get(i).map(|e| e.0).unwrap_or(u64::MAX);
            let kb = b.get(j).map(|e| e.0).unwrap_or(u64::MAX);
            if i < a.len() && (j >= b.len() || ka < kb) {
                s.add(a[i].1);
                i += 1;
            } else if j < b.len() && (i >= a.len() || kb < ka) {
                s.add(b[j].1);
                j += 1;
            } else {
                s.add((a[i].1 - b[j].1).abs());
                i += 1;
                j += 1;
            }
        }
        0.5 * s.value()
    }
}

/// In-place subset-sum (zeta) transform: `f[S] ← Σ_{T ⊆ S} f[T]`.
pub fn subset_sum_transform(f: &mut [f64]) {
    let n = f.len();
    debug_assert!(n.is_power_of_two());
    let mut bit = 1;
    while bit < n {
        for s in 0..n {
            if s & bit != 0 {
                f[s] += f[s ^ bit];
            }
        }
        bit <<= 1;
    }
}

/// Spreads the bits of a compact mask over the listed edge positions.
pub fn expand_mask(compact: u64, positions: &[usize]) -> u64 {
    let mut m = 0u64;
    for (i, &e) in positions.iter().enumerate() {
        if compact >> i & 1 == 1 {
            m |= 1 << e;
        }
    }
    m
}
