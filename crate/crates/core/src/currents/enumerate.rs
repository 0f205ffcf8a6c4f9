//! Exact sourced and double current measures by enumerating odd sets.
//!
//! Given the odd set `O` (with `∂O = A`), the remaining active edges are
//! independently even-positive with probability `(cosh K − 1)/cosh K`, so the
//! law is stored as a law of odd sets plus per-edge even probabilities.

use rayon::prelude::*;

use super::{Class, Current, CurrentMeasureSpec};
use crate::error::{Error, Result};
use crate::lattice::EdgeId;
use crate::law::{expand_mask, subset_sum_transform, ExactLaw};
use crate::numeric::KahanSum;

/// Largest number of active edges enumerated.
pub const CURRENT_EDGE_BUDGET: usize = 22;

/// Largest number of odd-set pairs combined by [`enumerate_double`].
const PAIR_BUDGET: usize = 1 << 26;

#[derive(Clone, Debug)]
pub struct SourcedLaw {
    num_edges: usize,
    active: Vec<EdgeId>,
    odd_sets: Vec<(u64, f64)>,
    even_prob: Vec<f64>,
    reduced_partition: f64,
    log_cosh_total: f64,
}

/// Odd sets over the active edges with `∂O = A`, each with `Π_O tanh K_e`.
fn odd_sets(spec: &CurrentMeasureSpec, active: &[EdgeId]) -> Result<Vec<(u64, f64)>> {
    let c = spec.couplings();
    if c.num_vertices() > 128 {
        return Err(Error::Size { what: "current enumeration vertices", needed: c.num_vertices(), budget: 128 });
    }
    let m = active.len();
    let vmask: Vec<u128> = active
        .iter()
        .map(|&e| {
            let (u, v) = c.ends(e);
            (1u128 << u) ^ (1u128 << v)
        })
        .collect();
    let target = spec.sources().iter().fold(0u128, |t, &v| t ^ 1 << v);
    let tanh: Vec<f64> = active.iter().map(|&e| c.coupling(e).tanh()).collect();
    let chunk_bits = m.min(14);
    let chunk = 1u64 << chunk_bits;
    let n_chunks = 1u64 << (m - chunk_bits);
    let found: Vec<Vec<(u64, f64)>> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let start = k * chunk;
            let mut out = Vec::new();
            let mut gray = start ^ (start >> 1);
            let mut boundary = (0..m).filter(|&i| gray >> i & 1 == 1).fold(0u128, |b, i| b ^ vmask[i]);
            for idx in start..start + chunk {
                if idx != start {
                    let bit = idx.trailing_zeros() as usize;
                    gray ^= 1 << bit;
                    boundary ^= vmask[bit];
                }
                if boundary == target {
                    let w: f64 = (0..m).filter(|&i| gray >> i & 1 == 1).map(|i| tanh[i]).product();
                    out.push((gray, w));
                }
            }
            out
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

fn active_edges(spec: &CurrentMeasureSpec) -> Result<Vec<EdgeId>> {
    let c = spec.couplings();
    if c.num_edges() > 64 {
        return Err(Error::Size { what: "current enumeration edges", needed: c.num_edges(), budget: 64 });
    }
    let active = c.active_edges();
    if active.len() > CURRENT_EDGE_BUDGET {
        return Err(Error::Size { what: "current enumeration", needed: active.len(), budget: CURRENT_EDGE_BUDGET });
    }
    Ok(active)
}

/// Exact law of class configurations with `∂n = A`. An unrealizable source
/// set gives an empty law (see [`SourcedLaw::is_empty`]).
pub fn enumerate_sourced(spec: &CurrentMeasureSpec) -> Result<SourcedLaw> {
    let c = spec.couplings();
    let active = active_edges(spec)?;
    let mut even_prob = vec![0.0; c.num_edges()];
    let mut log_cosh = KahanSum::new();
    for &e in &active {
        let k = c.coupling(e);
        even_prob[e] = 1.0 - 1.0 / k.cosh();
        log_cosh.add(k.cosh().ln());
    }
    let raw = if spec.is_realizable() { odd_sets(spec, &active)? } else { Vec::new() };
    let total: KahanSum = raw.iter().map(|&(_, w)| w).collect();
    let z = total.value();
    let mut odd_sets: Vec<(u64, f64)> = raw.into_iter().map(|(o, w)| (expand_mask(o, &active), w / z)).collect();
    odd_sets.sort_by_key(|&(o, _)| o);
    Ok(SourcedLaw {
        num_edges: c.num_edges(),
        active,
        odd_sets,
        even_prob,
        reduced_partition: z.max(0.0),
        log_cosh_total: log_cosh.value(),
    })
}

impl SourcedLaw {
    pub fn is_empty(&self) -> bool {
        self.odd_sets.is_empty()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Normalized law of the odd set, keyed by edge mask.
    pub fn odd_sets(&self) -> &[(u64, f64)] {
        &self.odd_sets
    }

    /// Conditional probability that a non-odd active edge is even-positive.
    pub fn even_prob(&self, e: EdgeId) -> f64 {
        self.even_prob[e]
    }

    /// `Z_A / Π_e cosh K_e = Σ_O Π_O tanh K_e`.
    pub fn reduced_partition(&self) -> f64 {
        self.reduced_partition
    }

    /// `Z_A = Σ_{∂n=A} w(n)`.
    pub fn partition(&self) -> f64 {
        self.reduced_partition * self.log_cosh_total.exp()
    }

    /// Probability of one class configuration.
    pub fn prob_class(&self, n: &Current) -> f64 {
        let Some(odd) = n.odd_mask() else { return 0.0 };
        let p_odd = match self.odd_sets.binary_search_by_key(&odd, |&(o, _)| o) {
            Ok(i) => self.odd_sets[i].1,
            Err(_) => return 0.0,
        };
        let mut p = p_odd;
        for e in 0..self.num_edges {
            let q = self.even_prob[e];
            match n.label(e) {
                Class::Odd => {}
                Class::EvenPositive => p *= q,
                Class::Zero => p *= 1.0 - q,
            }
        }
        p
    }

    /// Every class configuration with its probability; intended for small
    /// graphs (the support grows like `3^|E|`).
    pub fn class_configurations(&self) -> Vec<(Current, f64)> {
        let mut out = Vec::new();
        for &(odd, p) in &self.odd_sets {
            let free: Vec<EdgeId> = self.active.iter().copied().filter(|&e| odd >> e & 1 == 0).collect();
            for c in 0..1u64 << free.len() {
                let even = expand_mask(c, &free);
                let mut q = p;
                for (i, &e) in free.iter().enumerate() {
                    q *= if c >> i & 1 == 1 { self.even_prob[e] } else { 1.0 - self.even_prob[e] };
                }
                out.push((Current::from_masks(self.num_edges, odd, even), q));
            }
        }
        out
    }

    /// Law of the traced current `n̂`.
    pub fn trace_law(&self) -> Result<ExactLaw> {
        if self.is_empty() {
            return Err(Error::Unrealizable(Vec::new()));
        }
        let m = self.active.len();
        let pos_of = |e: EdgeId| self.active.iter().position(|&a| a == e).unwrap_or(usize::MAX);
        let compact = |mask: u64| -> u64 {
            (0..self.num_edges).filter(|&e| mask >> e & 1 == 1).fold(0u64, |c, e| c | 1 << pos_of(e))
        };
        let q: Vec<f64> = self.active.iter().map(|&e| self.even_prob[e]).collect();
        let mut f = vec![0.0; 1 << m];
        for &(odd, p) in &self.odd_sets {
            let o = compact(odd);
            let denom: f64 = (0..m).filter(|&i| o >> i & 1 == 1).map(|i| q[i]).product();
            f[o as usize] += p / denom;
        }
        subset_sum_transform(&mut f);
        let weights = f.iter().enumerate().map(|(w, &s)| {
            let w = w as u64;
            let base: f64 = (0..m).map(|i| if w >> i & 1 == 1 { q[i] } else { 1.0 - q[i] }).product();
            (expand_mask(w, &self.active), base * s)
        });
        ExactLaw::from_weights(self.num_edges, weights.collect::<Vec<_>>())
    }
}

/// Law of the trace of `n + m` with `n ~ P^A` and `m ~ P^B` independent.
/// The two specs must share the graph; their couplings may differ.
pub fn enumerate_double(spec_a: &CurrentMeasureSpec, spec_b: &CurrentMeasureSpec) -> Result<ExactLaw> {
    let (ca, cb) = (spec_a.couplings(), spec_b.couplings());
    if ca.all_ends() != cb.all_ends() || ca.num_vertices() != cb.num_vertices() {
        return Err(Error::Parameter("double measure needs one graph".into()));
    }
    let la = enumerate_sourced(spec_a)?;
    let lb = enumerate_sourced(spec_b)?;
    if la.is_empty() || lb.is_empty() {
        let mut bad = spec_a.unrealizable_components();
        bad.extend(spec_b.unrealizable_components());
        return Err(Error::Unrealizable(bad));
    }
    let pairs = la.odd_sets.len().saturating_mul(lb.odd_sets.len());
    if pairs > PAIR_BUDGET {
        return Err(Error::Size { what: "double current pairs", needed: pairs, budget: PAIR_BUDGET });
    }
    let n_edges = ca.num_edges();
    let active: Vec<EdgeId> = (0..n_edges).filter(|&e| ca.coupling(e) > 0.0 || cb.coupling(e) > 0.0).collect();
    let m = active.len();
    if m > CURRENT_EDGE_BUDGET {
        return Err(Error::Size { what: "double current enumeration", needed: m, budget: CURRENT_EDGE_BUDGET });
    }
    // Per active edge: cA cB − 1 for an open edge in neither odd set, and the
    // ratios of the three odd cases to it.
    let mut open_both_even = vec![0.0; m];
    let mut r_a = vec![0.0; m];
    let mut r_b = vec![0.0; m];
    let mut r_ab = vec![0.0; m];
    for (i, &e) in active.iter().enumerate() {
        let (ka, kb) = (ca.coupling(e), cb.coupling(e));
        let base = ka.cosh() * kb.cosh() - 1.0;
        open_both_even[i] = base;
        r_a[i] = ka.sinh() * kb.cosh() / base;
        r_b[i] = ka.cosh() * kb.sinh() / base;
        r_ab[i] = ka.sinh() * kb.sinh() / base;
    }
    let compact = |mask: u64| -> u64 {
        active.iter().enumerate().filter(|(_, &e)| mask >> e & 1 == 1).fold(0u64, |c, (i, _)| c | 1 << i)
    };
    let oa: Vec<(u64, f64)> = la.odd_sets.iter().map(|&(o, _)| (compact(o), 1.0)).collect();
    let ob: Vec<(u64, f64)> = lb.odd_sets.iter().map(|&(o, _)| (compact(o), 1.0)).collect();
    let mut f = vec![0.0; 1 << m];
    for &(x, _) in &oa {
        for &(y, _) in &ob {
            let mut w = 1.0;
            for i in 0..m {
                match (x >> i & 1, y >> i & 1) {
                    (1, 1) => w *= r_ab[i],
                    (1, 0) => w *= r_a[i],
                    (0, 1) => w *= r_b[i],
                    _ => {}
                }
            }
            f[(x | y) as usize] += w;
        }
    }
    subset_sum_transform(&mut f);
    let weights: Vec<(u64, f64)> = f
        .iter()
        .enumerate()
        .map(|(w, &s)| {
            let w = w as u64;
            let base: f64 = (0..m).filter(|&i| w >> i & 1 == 1).map(|i| open_both_even[i]).product();
            (expand_mask(w, &active), base * s)
        })
        .collect();
    ExactLaw::from_weights(n_edges, weights)
}
