//! Swendsen–Wang (Edwards–Sokal) chain for the FK model with ghost.
//!
//! The ghost is an ordinary vertex of the joint spin/bond measure. Wired
//! vertices are kept in one cluster, so they always share a spin.

use std::collections::BTreeMap;

use rand::RngCore;

use super::{BondConfig, FkParams};
use crate::error::{Error, Result};
use crate::lattice::{GhostGraph, Region, VertexId};
use crate::numeric::batch_mean_stderr;
use crate::record::EstimateRecord;
use crate::rng::{chain_rng, ChainRng};
use crate::unionfind::UnionFind;

/// Sweeps discarded before the first measurement.
pub const DEFAULT_BURN_IN: usize = 200;

#[derive(Clone, Debug)]
pub struct SwChain {
    params: FkParams,
    /// `p_e · 2^64`, compared against a uniform `u64`.
    threshold: Vec<u64>,
    active: Vec<usize>,
    spins: Vec<bool>,
    bonds: BondConfig,
    uf: UnionFind,
    base: UnionFind,
    fresh: Vec<u8>,
    rng: ChainRng,
}

fn threshold(p: f64) -> u64 {
    if p <= 0.0 {
        0
    } else {
        (p * 18_446_744_073_709_551_616.0).min(u64::MAX as f64) as u64
    }
}

impl SwChain {
    pub fn new(params: FkParams, seed: u64, chain: u64) -> Self {
        let threshold: Vec<u64> = params.probs().iter().map(|&p| threshold(p)).collect();
        let active = (0..params.num_edges()).filter(|&e| threshold[e] > 0).collect();
        let n = params.num_vertices();
        let base = params.wired_union_find();
        Self {
            bonds: BondConfig::closed(params.num_edges()),
            threshold,
            active,
            spins: vec![true; n],
            uf: base.clone(),
            base,
            fresh: vec![0; n],
            rng: chain_rng(seed, chain),
            params,
        }
    }

    pub fn params(&self) -> &FkParams {
        &self.params
    }

    /// Bond update given spins, then a fresh uniform spin per cluster.
    pub fn sweep(&mut self) {
        for &e in &self.active {
            let (u, v) = self.params.ends(e);
            let open = self.spins[u] == self.spins[v] && self.rng.next_u64() < self.threshold[e];
            self.bonds.set(e, open);
        }
        self.uf.clone_from(&self.base);
        for &e in &self.active {
            if self.bonds.is_open(e) {
                let (u, v) = self.params.ends(e);
                self.uf.union(u, v);
            }
        }
        // 0 = unassigned, 1 = plus, 2 = minus.
        self.fresh.iter_mut().for_each(|f| *f = 0);
        let mut bits = 0u64;
        let mut left = 0;
        for v in 0..self.spins.len() {
            let r = self.uf.find(v);
            if self.fresh[r] == 0 {
                if left == 0 {
                    bits = self.rng.next_u64();
                    left = 64;
                }
                self.fresh[r] = 1 + (bits & 1) as u8;
                bits >>= 1;
                left -= 1;
            }
            self.spins[v] = self.fresh[r] == 1;
        }
    }

    pub fn run(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.sweep();
        }
    }

    /// Current bond configuration (an FK sample at stationarity).
    pub fn bonds(&self) -> &BondConfig {
        &self.bonds
    }

    /// Clusters of the last bond configuration, wired set identified.
    pub fn clusters(&mut self) -> &mut UnionFind {
        &mut self.uf
    }
}

/// One configuration after `sweeps` Swendsen–Wang sweeps from the all-plus
/// start.
pub fn sw_sample(params: &FkParams, seed: u64, sweeps: usize) -> Result<BondConfig> {
    if sweeps == 0 {
        return Err(Error::Parameter("sweeps must be >= 1".into()));
    }
    let mut chain = SwChain::new(params.clone(), seed, 0);
    chain.run(sweeps);
    Ok(chain.bonds.clone())
}

/// Monte Carlo estimate of `φ(A ↔ B)` with batch-means error bars.
pub fn connection_prob(
    g: &GhostGraph,
    p: &FkParams,
    a: &Region,
    b: &Region,
    via_ghost: bool,
    n_samples: usize,
    seed: u64,
) -> Result<EstimateRecord> {
    if n_samples == 0 {
        return Err(Error::Parameter("n_samples must be >= 1".into()));
    }
    let va: Vec<VertexId> = g.vertices_in(a);
    let vb: Vec<VertexId> = g.vertices_in(b);
    if va.is_empty() || vb.is_empty() {
        return Err(Error::Parameter("region contains no vertex of the graph".into()));
    }
    let mut chain = SwChain::new(p.clone(), seed, 0);
    chain.run(DEFAULT_BURN_IN);
    let mut xs = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        chain.sweep();
        let mut uf = chain.bonds().connectivity(p, via_ghost);
        let roots: std::collections::HashSet<usize> = va.iter().map(|&v| uf.find(v)).collect();
        let hit = vb.iter().any(|&v| roots.contains(&uf.find(v)));
        xs.push(if hit { 1.0 } else { 0.0 });
    }
    let (mean, stderr) = batch_mean_stderr(&xs, 20);
    let mut params = BTreeMap::new();
    params.insert("a".to_string(), g.spacing());
    params.insert("via_ghost".to_string(), if via_ghost { 1.0 } else { 0.0 });
    Ok(EstimateRecord::new("connection_prob", params, mean, stderr, n_samples, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fk::{enumerate_fk, mask_connected};
    use crate::model::SpinParams;

    #[test]
    fn deterministic_given_seed() {
        let g = GhostGraph::rectangle(1.0, 4, 4).unwrap();
        let p = FkParams::critical(&g, 0.2).unwrap();
        assert_eq!(sw_sample(&p, 5, 30).unwrap(), sw_sample(&p, 5, 30).unwrap());
        assert_ne!(sw_sample(&p, 5, 30).unwrap(), sw_sample(&p, 6, 30).unwrap());
    }

    #[test]
    fn one_edge_open_probability() {
        let g = GhostGraph::rectangle(1.0, 2, 1).unwrap();
        let p = FkParams::critical(&g, 0.0).unwrap();
        let exact = enumerate_fk(&p).unwrap().edge_marginals()[0];
        let mut chain = SwChain::new(p, 11, 0);
        let n = 100_000;
        let mut open = 0;
        for _ in 0..n {
            chain.sweep();
            open += chain.bonds().is_open(0) as usize;
        }
        assert!((open as f64 / n as f64 - exact).abs() < 0.01);
    }

    #[test]
    fn strong_field_wires_everything_to_ghost() {
        let g = GhostGraph::rectangle(1.0, 3, 3).unwrap();
        let p = FkParams::critical(&g, 40.0).unwrap();
        let mut chain = SwChain::new(p, 1, 0);
        let mut all = 0;
        for _ in 0..200 {
            chain.sweep();
            let gh = g.ghost();
            let uf = chain.clusters();
            all += (0..9).all(|v| uf.same(v, gh)) as usize;
        }
        assert!(all >= 198);
    }

    #[test]
    fn connection_estimate_matches_exact() {
        let g = GhostGraph::rectangle(1.0, 3, 2).unwrap();
        let p = FkParams::critical(&g, 0.25).unwrap();
        let ends = p.couplings().all_ends().to_vec();
        let exact = enumerate_fk(&p).unwrap().prob(|m| mask_connected(&ends, 7, m, 0, 5));
        let a = Region::Vertices([g.point(0)].into_iter().collect());
        let b = Region::Vertices([g.point(5)].into_iter().collect());
        let r = connection_prob(&g, &p, &a, &b, true, 40_000, 3).unwrap();
        assert!((r.mean - exact).abs() < 4.0 * r.stderr + 1e-3, "{} vs {exact} ± {}", r.mean, r.stderr);
        let same = connection_prob(&g, &p, &a, &a, false, 10, 3).unwrap();
        assert_eq!(same.mean, 1.0);
    }

    #[test]
    fn wired_chain_keeps_wired_set_together() {
        let g = GhostGraph::rectangle(1.0, 4, 1).unwrap();
        let p = FkParams::new(&g, &SpinParams::critical(0.0), crate::fk::Boundary::WiredOn(vec![0, 3])).unwrap();
        let law = enumerate_fk(&p).unwrap();
        let exact = law.edge_marginals();
        let mut chain = SwChain::new(p, 2, 0);
        let n = 100_000;
        let mut open = vec![0usize; g.num_edges()];
        for _ in 0..n {
            chain.sweep();
            for (e, o) in open.iter_mut().enumerate() {
                *o += chain.bonds().is_open(e) as usize;
            }
        }
        for e in 0..g.num_edges() {
            assert!((open[e] as f64 / n as f64 - exact[e]).abs() < 0.01);
        }
    }
}
