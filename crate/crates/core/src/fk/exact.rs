//! Exact FK laws by enumeration, with the ghost-cluster and FKG/MON checks.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use super::FkParams;
use crate::error::{Error, Result};
use crate::lattice::EdgeId;
use crate::law::{expand_mask, ExactLaw};
use crate::unionfind::UnionFind;

/// Largest number of active edges enumerated.
pub const FK_EDGE_BUDGET: usize = 22;

/// The exact FK law. Edges with `p_e = 0` are closed in every configuration
/// and do not count towards the budget.
pub fn enumerate_fk(p: &FkParams) -> Result<ExactLaw> {
    let n_edges = p.num_edges();
    if n_edges > 64 {
        return Err(Error::Size { what: "FK enumeration edges", needed: n_edges, budget: 64 });
    }
    let pos: Vec<EdgeId> = (0..n_edges).filter(|&e| p.prob(e) > 0.0).collect();
    let m = pos.len();
    if m > FK_EDGE_BUDGET {
        return Err(Error::Size { what: "FK enumeration", needed: m, budget: FK_EDGE_BUDGET });
    }
    let ratio: Vec<f64> = pos.iter().map(|&e| p.prob(e) / (1.0 - p.prob(e))).collect();
    let ends: Vec<_> = pos.iter().map(|&e| p.ends(e)).collect();
    let base = p.wired_union_find();
    let weights: Vec<(u64, f64)> = (0..1u64 << m)
        .into_par_iter()
        .map_init(
            || base.clone(),
            |uf, c| {
                uf.clone_from(&base);
                let mut w = 1.0;
                for (i, &(u, v)) in ends.iter().enumerate() {
                    if c >> i & 1 == 1 {
                        uf.union(u, v);
                        w *= ratio[i];
                    }
                }
                w *= (uf.count_sets() as f64).exp2();
                (expand_mask(c, &pos), w)
            },
        )
        .collect();
    ExactLaw::from_weights(n_edges, weights)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GhostClusterReport {
    /// `max |P(C ↔ g | ω) − tanh(Σ_{v∈C} K_v)|` over internal configurations.
    pub max_marginal_deviation: f64,
    /// `max |P(S | ω) − Π_{C∈S} t_C Π_{C∉S} (1 − t_C)|` over cluster subsets.
    pub max_joint_deviation: f64,
    pub internal_configurations: usize,
}

/// Exact check that, given the internal edges, each cluster reaches the ghost
/// independently with probability `tanh` of its total ghost coupling.
pub fn ghost_cluster_check(p: &FkParams) -> Result<GhostClusterReport> {
    let c = p.couplings();
    let ghost = c.ghost().ok_or_else(|| Error::Parameter("graph has no ghost vertex".into()))?;
    if !p.wired().is_empty() {
        return Err(Error::Parameter("the ghost cluster law needs free boundary".into()));
    }
    let law = enumerate_fk(p)?;
    let n = c.num_vertices();
    let mut ghost_edge_of = vec![None; n];
    let mut ghost_mask = 0u64;
    for e in 0..c.num_edges() {
        let (u, v) = c.ends(e);
        if v == ghost || u == ghost {
            ghost_edge_of[if v == ghost { u } else { v }] = Some(e);
            ghost_mask |= 1 << e;
        }
    }
    let mut groups: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
    for &(m, w) in law.entries() {
        groups.entry(m & !ghost_mask).or_default().push((m & ghost_mask, w));
    }
    let mut max_marg: f64 = 0.0;
    let mut max_joint: f64 = 0.0;
    for (&internal, entries) in &groups {
        let mut uf = UnionFind::new(n);
        for e in 0..c.num_edges() {
            if internal >> e & 1 == 1 {
                let (u, v) = c.ends(e);
                uf.union(u, v);
            }
        }
        let mut cluster_of = vec![usize::MAX; n];
        let mut totals: Vec<f64> = Vec::new();
        for v in (0..n).filter(|&v| v != ghost) {
            let r = uf.find(v);
            if cluster_of[r] == usize::MAX {
                cluster_of[r] = totals.len();
                totals.push(0.0);
            }
            let k = ghost_edge_of[v].map_or(0.0, |e| c.coupling(e));
            totals[cluster_of[r]] += k;
        }
        let t: Vec<f64> = totals.iter().map(|k| k.tanh()).collect();
        let z: f64 = entries.iter().map(|&(_, w)| w).sum();
        let mut by_subset: BTreeMap<u64, f64> = BTreeMap::new();
        for &(gm, w) in entries {
            let mut s = 0u64;
            for v in (0..n).filter(|&v| v != ghost) {
                if let Some(e) = ghost_edge_of[v] {
                    if gm >> e & 1 == 1 {
                        s |= 1 << cluster_of[uf.find(v)];
                    }
                }
            }
            *by_subset.entry(s).or_default() += w / z;
        }
        let k = t.len();
        for (i, &ti) in t.iter().enumerate() {
            let pi: f64 = by_subset.iter().filter(|(s, _)| *s >> i & 1 == 1).map(|(_, w)| w).sum();
            max_marg = max_marg.max((pi - ti).abs());
        }
        let product = |s: u64| -> f64 {
            (0..k).map(|i| if s >> i & 1 == 1 { t[i] } else { 1.0 - t[i] }).product()
        };
        if k <= 16 {
            for s in 0..1u64 << k {
                let got = by_subset.get(&s).copied().unwrap_or(0.0);
                max_joint = max_joint.max((got - product(s)).abs());
            }
        } else {
            for (&s, &got) in &by_subset {
                max_joint = max_joint.max((got - product(s)).abs());
            }
        }
    }
    Ok(GhostClusterReport {
        max_marginal_deviation: max_marg,
        max_joint_deviation: max_joint,
        internal_configurations: groups.len(),
    })
}

/// Checks that `event` is increasing over the given edges: exhaustively for
/// up to 14 edges, otherwise on 4096 random (configuration, edge) pairs.
pub fn is_increasing<F: Fn(u64) -> bool>(edges: &[EdgeId], event: F) -> bool {
    let m = edges.len();
    let check = |c: u64, i: usize| -> bool {
        let w = expand_mask(c, edges);
        !event(w) || event(w | 1 << edges[i])
    };
    if m <= 14 {
        (0..1u64 << m).all(|c| (0..m).all(|i| check(c, i)))
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x1f2e3d4c);
        (0..4096).all(|_| {
            let c: u64 = rng.gen::<u64>() & ((1u64 << m) - 1);
            check(c, rng.gen_range(0..m))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FkgMonReport {
    pub prob_a: f64,
    pub prob_b: f64,
    pub prob_ab: f64,
    /// `φ(A∩B) − φ(A)φ(B)`; FKG says ≥ 0.
    pub fkg_gap: f64,
    /// `φ(A)` on the sub-domain.
    pub prob_a_sub: f64,
    /// `φ_big(A) − φ_sub(A)`; MON says ≥ 0 for increasing `A`.
    pub mon_gap: f64,
    pub holds: bool,
}

/// FKG for `A, B` on `p`, and MON comparing `p` with its restriction to
/// `sub_edges` (all other edges removed). Both events must be increasing.
pub fn verify_fkg_mon<A, B>(p: &FkParams, a: A, b: B, sub_edges: &[EdgeId]) -> Result<FkgMonReport>
where
    A: Fn(u64) -> bool,
    B: Fn(u64) -> bool,
{
    let active: Vec<EdgeId> = (0..p.num_edges()).filter(|&e| p.prob(e) > 0.0).collect();
    if !is_increasing(&active, &a) || !is_increasing(&active, &b) {
        return Err(Error::Contract("event is not increasing".into()));
    }
    let law = enumerate_fk(p)?;
    let pa = law.prob(&a);
    let pb = law.prob(&b);
    let pab = law.prob(|m| a(m) && b(m));
    let removed: Vec<EdgeId> = (0..p.num_edges()).filter(|e| !sub_edges.contains(e)).collect();
    let sub = FkParams::from_couplings(p.couplings().without_edges(&removed), p.wired().to_vec())?;
    let pa_sub = enumerate_fk(&sub)?.prob(&a);
    let fkg_gap = pab - pa * pb;
    let mon_gap = pa - pa_sub;
    Ok(FkgMonReport {
        prob_a: pa,
        prob_b: pb,
        prob_ab: pab,
        fkg_gap,
        prob_a_sub: pa_sub,
        mon_gap,
        holds: fkg_gap >= -1e-12 && mon_gap >= -1e-12,
    })
}
