//! Exact spin-level oracle by enumeration of all `2^|V|` spin states.
//!
//! States are visited in Gray-code order so every step flips one spin and the
//! energy is updated in `O(deg)`. The state space is split into contiguous
//! chunks whose partial sums are reduced in a fixed order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{GhostGraph, VertexId};
use crate::model::{Couplings, SpinParams};
use crate::numeric::KahanSum;

/// Largest number of free spins the oracle will enumerate.
pub const SPIN_BUDGET: usize = 24;

struct SpinSystem {
    n: usize,
    /// Spin index of each vertex; `None` for the pinned ghost.
    spin_of: Vec<Option<usize>>,
    /// Per spin: (neighbour spin or None for a pinned neighbour, coupling).
    nbrs: Vec<Vec<(Option<usize>, f64)>>,
    top_energy: f64,
}

impl SpinSystem {
    fn new(c: &Couplings) -> Result<Self> {
        let n = c.num_spins();
        if n > SPIN_BUDGET {
            return Err(Error::Size { what: "spin enumeration", needed: n, budget: SPIN_BUDGET });
        }
        let mut spin_of = vec![None; c.num_vertices()];
        let mut next = 0;
        for (v, slot) in spin_of.iter_mut().enumerate() {
            if Some(v) != c.ghost() {
                *slot = Some(next);
                next += 1;
            }
        }
        let mut nbrs = vec![Vec::new(); n];
        let mut top_energy = 0.0;
        for e in 0..c.num_edges() {
            let k = c.coupling(e);
            if k == 0.0 {
                continue;
            }
            top_energy += k;
            let (u, v) = c.ends(e);
            let (su, sv) = (spin_of[u], spin_of[v]);
            if let Some(i) = su {
                nbrs[i].push((sv, k));
            }
            if let Some(j) = sv {
                nbrs[j].push((su, k));
            }
        }
        Ok(Self { n, spin_of, nbrs, top_energy })
    }

    /// Bit mask of the free spins in `set`; the ghost contributes `+1`.
    fn mask(&self, set: &[VertexId]) -> Result<u32> {
        let mut m = 0u32;
        for &v in set {
            match self.spin_of.get(v) {
                None => return Err(Error::Parameter(format!("vertex {v} not in graph"))),
                Some(None) => {}
                Some(Some(i)) => m ^= 1 << i,
            }
        }
        Ok(m)
    }

    /// Energy `Σ K σσ` of a state given as a bit mask (bit set ⇔ σ = -1).
    fn energy(&self, state: u32) -> f64 {
        let spin = |s: Option<usize>| match s {
            None => 1.0,
            Some(i) => {
                if state >> i & 1 == 1 {
                    -1.0
                } else {
                    1.0
                }
            }
        };
        let mut e = 0.0;
        for i in 0..self.n {
            for &(j, k) in &self.nbrs[i] {
                // Each free-free edge is seen twice; pinned neighbours once.
                let w = if j.is_some() { 0.5 } else { 1.0 };
                e += w * k * spin(Some(i)) * spin(j);
            }
        }
        e
    }

    fn flip_delta(&self, state: u32, i: usize) -> f64 {
        let si = if state >> i & 1 == 1 { -1.0 } else { 1.0 };
        let mut local = 0.0;
        for &(j, k) in &self.nbrs[i] {
            let sj = match j {
                None => 1.0,
                Some(j) => {
                    if state >> j & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                }
            };
            local += k * sj;
        }
        -2.0 * si * local
    }

    /// Returns `Z` (shifted) and `Σ σ_A w` for each mask.
    fn sums(&self, masks: &[u32]) -> (f64, Vec<f64>) {
        let total: u64 = 1u64 << self.n;
        let chunk_bits = if self.n > 14 { self.n - 6 } else { self.n };
        let chunk = 1u64 << chunk_bits;
        let n_chunks = (total / chunk) as usize;
        let partials: Vec<(KahanSum, Vec<KahanSum>)> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let start = c as u64 * chunk;
                let mut z = KahanSum::new();
                let mut acc = vec![KahanSum::new(); masks.len()];
                let mut state = (start ^ (start >> 1)) as u32;
                let mut energy = self.energy(state);
                for idx in start..start + chunk {
                    if idx != start {
                        let bit = idx.trailing_zeros() as usize;
                        energy += self.flip_delta(state, bit);
                        state ^= 1 << bit;
                    }
                    let w = (energy - self.top_energy).exp();
                    z.add(w);
                    for (a, &m) in acc.iter_mut().zip(masks) {
                        if (state & m).count_ones() & 1 == 0 {
                            a.add(w);
                        } else {
                            a.add(-w);
                        }
                    }
                }
                (z, acc)
            })
            .collect();
        let mut z = KahanSum::new();
        let mut acc = vec![KahanSum::new(); masks.len()];
        for (pz, pa) in &partials {
            z.merge(pz);
            for (a, b) in acc.iter_mut().zip(pa) {
                a.merge(b);
            }
        }
        (z.value(), acc.iter().map(|a| a.value()).collect())
    }
}

/// `⟨σ_A⟩` for each set, in one enumeration pass.
pub fn correlations(c: &Couplings, sets: &[Vec<VertexId>]) -> Result<Vec<f64>> {
    let sys = SpinSystem::new(c)?;
    let masks = sets.iter().map(|s| sys.mask(s)).collect::<Result<Vec<_>>>()?;
    let (z, sums) = sys.sums(&masks);
    Ok(sums.into_iter().map(|s| s / z).collect())
}

/// `⟨σ_x σ_y⟩ − ⟨σ_x⟩⟨σ_y⟩` on an arbitrary coupling graph.
pub fn truncated(c: &Couplings, x: VertexId, y: VertexId) -> Result<f64> {
    let v = correlations(c, &[vec![x, y], vec![x], vec![y]])?;
    Ok(v[0] - v[1] * v[2])
}

/// `⟨σ_A⟩` on a lattice graph with field `h_x a^{15/8}` at each vertex.
pub fn exact_correlation(g: &GhostGraph, set: &[VertexId], p: &SpinParams) -> Result<f64> {
    let c = Couplings::from_lattice(g, p)?;
    Ok(correlations(&c, &[set.to_vec()])?[0])
}

pub fn exact_truncated(g: &GhostGraph, x: VertexId, y: VertexId, p: &SpinParams) -> Result<f64> {
    let c = Couplings::from_lattice(g, p)?;
    truncated(&c, x, y)
}
