//! Random-cluster (FK, q = 2) model on the ghost graph.
//!
//! Edge parameters are `p_e = 1 − e^{−2K_e}` for the couplings `K_e` of
//! [`Couplings`]. A wired boundary identifies a vertex set before clusters are
//! counted; connection events are always evaluated on the un-identified
//! graph.

mod exact;
mod sampler;

pub use exact::{
    enumerate_fk, ghost_cluster_check, is_increasing, verify_fkg_mon, FkgMonReport, GhostClusterReport,
    FK_EDGE_BUDGET,
};
pub use sampler::{connection_prob, sw_sample, SwChain, DEFAULT_BURN_IN};

use crate::error::{Error, Result};
use crate::lattice::{EdgeId, GhostGraph, VertexId};
use crate::model::{Couplings, SpinParams};
use crate::unionfind::UnionFind;

#[derive(Clone, Debug, PartialEq)]
pub enum Boundary {
    Free,
    /// Identify all vertices with fewer than four lattice neighbours.
    Wired,
    /// Identify the listed vertices.
    WiredOn(Vec<VertexId>),
}

#[derive(Clone, Debug)]
pub struct FkParams {
    couplings: Couplings,
    probs: Vec<f64>,
    wired: Vec<VertexId>,
}

impl FkParams {
    pub fn new(g: &GhostGraph, spin: &SpinParams, bc: Boundary) -> Result<Self> {
        let c = Couplings::from_lattice(g, spin)?;
        let wired = match bc {
            Boundary::Free => Vec::new(),
            Boundary::Wired => g.outer_boundary(),
            Boundary::WiredOn(vs) => vs,
        };
        Self::from_couplings(c, wired)
    }

    /// Critical FK measure with uniform field `h` and free boundary.
    pub fn critical(g: &GhostGraph, h: f64) -> Result<Self> {
        Self::new(g, &SpinParams::critical(h), Boundary::Free)
    }

    pub fn from_couplings(c: Couplings, wired: Vec<VertexId>) -> Result<Self> {
        let probs: Vec<f64> = c.couplings().iter().map(|&k| -(-2.0 * k).exp_m1()).collect();
        if let Some(e) = probs.iter().position(|&p| p >= 1.0) {
            return Err(Error::Parameter(format!("edge {e} has p_e = 1")));
        }
        if let Some(&v) = wired.iter().find(|&&v| v >= c.num_vertices()) {
            return Err(Error::Parameter(format!("wired vertex {v} out of range")));
        }
        Ok(Self { couplings: c, probs, wired })
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    pub fn prob(&self, e: EdgeId) -> f64 {
        self.probs[e]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn wired(&self) -> &[VertexId] {
        &self.wired
    }

    pub fn num_vertices(&self) -> usize {
        self.couplings.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.probs.len()
    }

    pub fn ends(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.couplings.ends(e)
    }

    pub fn ghost(&self) -> Option<VertexId> {
        self.couplings.ghost()
    }

    /// Union-find with the wired set already merged.
    pub(crate) fn wired_union_find(&self) -> UnionFind {
        let mut uf = UnionFind::new(self.num_vertices());
        for w in self.wired.windows(2) {
            uf.union(w[0], w[1]);
        }
        uf
    }
}

/// One open/closed bit per edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BondConfig {
    open: Vec<bool>,
}

impl BondConfig {
    pub fn closed(num_edges: usize) -> Self {
        Self { open: vec![false; num_edges] }
    }

    pub fn from_bits(open: Vec<bool>) -> Self {
        Self { open }
    }

    pub fn from_mask(num_edges: usize, mask: u64) -> Self {
        Self { open: (0..num_edges).map(|e| mask >> e & 1 == 1).collect() }
    }

    /// Mask encoding; `None` beyond 64 edges.
    pub fn to_mask(&self) -> Option<u64> {
        if self.open.len() > 64 {
            return None;
        }
        Some(self.open.iter().enumerate().filter(|(_, &o)| o).fold(0u64, |m, (e, _)| m | 1 << e))
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn is_open(&self, e: EdgeId) -> bool {
        self.open[e]
    }

    pub fn set(&mut self, e: EdgeId, open: bool) {
        self.open[e] = open;
    }

    pub fn bits(&self) -> &[bool] {
        &self.open
    }

    pub fn open_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.open.iter().enumerate().filter(|(_, &o)| o).map(|(e, _)| e)
    }

    pub fn num_open(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    /// `k(ω)`: clusters of `V ∪ {g}` after identifying the wired set.
    pub fn cluster_count(&self, p: &FkParams) -> usize {
        let mut uf = p.wired_union_find();
        for e in self.open_edges() {
            let (u, v) = p.ends(e);
            uf.union(u, v);
        }
        uf.count_sets()
    }

    /// Connectivity of the un-identified graph; ghost edges are ignored when
    /// `via_ghost` is false.
    pub fn connectivity(&self, p: &FkParams, via_ghost: bool) -> UnionFind {
        let c = p.couplings();
        let ghost = c.ghost();
        let mut uf = UnionFind::new(c.num_vertices());
        for e in self.open_edges() {
            let (u, v) = c.ends(e);
            if !via_ghost && (Some(u) == ghost || Some(v) == ghost) {
                continue;
            }
            uf.union(u, v);
        }
        uf
    }
}

/// Unnormalized weight `2^{k(ω)} Π_{open} p_e/(1−p_e)`.
pub fn fk_weight(w: &BondConfig, p: &FkParams) -> Result<f64> {
    if w.len() != p.num_edges() {
        return Err(Error::Parameter("configuration length does not match graph".into()));
    }
    let mut log = w.cluster_count(p) as f64 * std::f64::consts::LN_2;
    for e in w.open_edges() {
        let pe = p.prob(e);
        if pe == 0.0 {
            return Ok(0.0);
        }
        log += (pe / (1.0 - pe)).ln();
    }
    Ok(log.exp())
}

/// Whether `u` and `v` are joined by open edges of `mask`.
pub fn mask_connected(ends: &[(VertexId, VertexId)], n: usize, mask: u64, u: VertexId, v: VertexId) -> bool {
    if u == v {
        return true;
    }
    let mut uf = UnionFind::new(n);
    for (e, &(a, b)) in ends.iter().enumerate() {
        if mask >> e & 1 == 1 {
            uf.union(a, b);
        }
    }
    uf.same(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising_exact;
    use crate::model::beta_critical;

    #[test]
    fn all_closed_weight() {
        let g = GhostGraph::rectangle(1.0, 2, 2).unwrap();
        let p = FkParams::critical(&g, 0.3).unwrap();
        let w = fk_weight(&BondConfig::closed(g.num_edges()), &p).unwrap();
        assert_eq!(w, 2f64.powi(5));
    }

    #[test]
    fn all_open_weight() {
        let g = GhostGraph::rectangle(1.0, 2, 2).unwrap();
        let p = FkParams::critical(&g, 0.3).unwrap();
        let w = fk_weight(&BondConfig::from_bits(vec![true; g.num_edges()]), &p).unwrap();
        let prod: f64 = p.probs().iter().map(|&q| q / (1.0 - q)).product();
        assert!((w - 2.0 * prod).abs() < 1e-12 * w);
    }

    #[test]
    fn one_edge_ratio_and_spin_dictionary() {
        let g = GhostGraph::rectangle(1.0, 2, 1).unwrap();
        let p = FkParams::critical(&g, 0.0).unwrap();
        let e = g.lattice_edge(0, crate::lattice::Direction::East).unwrap();
        let mut open = BondConfig::closed(g.num_edges());
        open.set(e, true);
        let ratio = fk_weight(&open, &p).unwrap() / fk_weight(&BondConfig::closed(g.num_edges()), &p).unwrap();
        let b = beta_critical();
        let expect = (1.0 - (-2.0 * b).exp()) / (-2.0 * b).exp() * 0.5;
        assert!((ratio - expect).abs() < 1e-14);
        // φ(u↔v) = ratio/(1+ratio) = tanh β_c = ⟨σ_u σ_v⟩.
        let corr = ising_exact::exact_correlation(&g, &[0, 1], &SpinParams::critical(0.0)).unwrap();
        assert!((ratio / (1.0 + ratio) - corr).abs() < 1e-14);
    }

    #[test]
    fn wiring_reduces_cluster_count() {
        let g = GhostGraph::rectangle(1.0, 3, 1).unwrap();
        let free = FkParams::critical(&g, 0.0).unwrap();
        let wired = FkParams::new(&g, &SpinParams::critical(0.0), Boundary::WiredOn(vec![0, 2])).unwrap();
        let w = BondConfig::closed(g.num_edges());
        assert_eq!(w.cluster_count(&free), 4);
        assert_eq!(w.cluster_count(&wired), 3);
        assert!(!w.connectivity(&wired, true).clone().same(0, 2));
    }

    #[test]
    fn mask_connectivity() {
        let ends = [(0, 1), (1, 2), (2, 3)];
        assert!(mask_connected(&ends, 4, 0b011, 0, 2));
        assert!(!mask_connected(&ends, 4, 0b101, 0, 3));
        assert!(mask_connected(&ends, 4, 0, 3, 3));
    }
}
