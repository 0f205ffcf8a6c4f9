//! Random currents stored by parity class.
//!
//! Summing the current weight `Π K_e^{n_e}/n_e!` over multiplicities of a
//! fixed class gives the per-edge factors `1` (zero), `cosh K − 1`
//! (even-positive) and `sinh K` (odd). Sources depend only on the odd edges.

mod enumerate;
mod worm;

pub use enumerate::{enumerate_double, enumerate_sourced, SourcedLaw, CURRENT_EDGE_BUDGET};
pub use worm::{worm_sample, WormChain};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::lattice::{EdgeId, GhostGraph, VertexId};
use crate::model::{Couplings, SpinParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Zero,
    EvenPositive,
    Odd,
}

impl Class {
    pub fn of(n: u32) -> Class {
        if n == 0 {
            Class::Zero
        } else if n % 2 == 0 {
            Class::EvenPositive
        } else {
            Class::Odd
        }
    }

    /// Weight of the class summed over its multiplicities.
    pub fn factor(self, k: f64) -> f64 {
        match self {
            Class::Zero => 1.0,
            Class::EvenPositive => k.cosh() - 1.0,
            Class::Odd => k.sinh(),
        }
    }

    pub fn is_open(self) -> bool {
        self != Class::Zero
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Current {
    labels: Vec<Class>,
    multiplicity: Option<Vec<u32>>,
}

impl Current {
    pub fn zero(num_edges: usize) -> Self {
        Self { labels: vec![Class::Zero; num_edges], multiplicity: None }
    }

    pub fn from_labels(labels: Vec<Class>) -> Self {
        Self { labels, multiplicity: None }
    }

    pub fn from_multiplicities(n: Vec<u32>) -> Self {
        Self { labels: n.iter().map(|&k| Class::of(k)).collect(), multiplicity: Some(n) }
    }

    /// Odd edges from `odd`, even-positive edges from `even`.
    pub fn from_masks(num_edges: usize, odd: u64, even: u64) -> Self {
        let labels = (0..num_edges)
            .map(|e| {
                if odd >> e & 1 == 1 {
                    Class::Odd
                } else if even >> e & 1 == 1 {
                    Class::EvenPositive
                } else {
                    Class::Zero
                }
            })
            .collect();
        Self::from_labels(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, e: EdgeId) -> Class {
        self.labels[e]
    }

    pub fn labels(&self) -> &[Class] {
        &self.labels
    }

    pub fn multiplicities(&self) -> Option<&[u32]> {
        self.multiplicity.as_deref()
    }

    pub fn is_odd(&self, e: EdgeId) -> bool {
        self.labels[e] == Class::Odd
    }

    /// The traced current: open iff the multiplicity is positive.
    pub fn trace(&self) -> Vec<bool> {
        self.labels.iter().map(|c| c.is_open()).collect()
    }

    pub fn odd_mask(&self) -> Option<u64> {
        mask_of(&self.labels, Class::Odd)
    }

    pub fn trace_mask(&self) -> Option<u64> {
        if self.labels.len() > 64 {
            return None;
        }
        Some(self.labels.iter().enumerate().filter(|(_, c)| c.is_open()).fold(0, |m, (e, _)| m | 1 << e))
    }
}

fn mask_of(labels: &[Class], class: Class) -> Option<u64> {
    if labels.len() > 64 {
        return None;
    }
    Some(labels.iter().enumerate().filter(|(_, &c)| c == class).fold(0, |m, (e, _)| m | 1 << e))
}

/// Vertices of odd total incident multiplicity, sorted.
pub fn sources(n: &Current, ends: &[(VertexId, VertexId)]) -> Vec<VertexId> {
    let mut odd = BTreeSet::new();
    for (e, &(u, v)) in ends.iter().enumerate() {
        if n.is_odd(e) {
            for w in [u, v] {
                if !odd.remove(&w) {
                    odd.insert(w);
                }
            }
        }
    }
    odd.into_iter().collect()
}

/// `Π K_e^{n_e} / n_e!` for a current carrying integer multiplicities.
pub fn current_weight(n: &Current, spec: &CurrentMeasureSpec) -> Result<f64> {
    let mult = n.multiplicities().ok_or_else(|| Error::Contract("current has no integer multiplicities".into()))?;
    if mult.len() != spec.couplings.num_edges() {
        return Err(Error::Parameter("current length does not match graph".into()));
    }
    let mut w = 1.0;
    for (e, &k) in mult.iter().enumerate() {
        let c = spec.couplings.coupling(e);
        for j in 1..=k {
            w *= c / j as f64;
        }
    }
    Ok(w)
}

/// Graph, couplings and source set of a sourced current measure.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentMeasureSpec {
    couplings: Couplings,
    sources: Vec<VertexId>,
}

impl CurrentMeasureSpec {
    /// Sources are taken as a multiset reduced mod 2, so `{x, x}` is `∅`.
    pub fn new(couplings: Couplings, sources: &[VertexId]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &v in sources {
            if v >= couplings.num_vertices() {
                return Err(Error::Parameter(format!("source {v} out of range")));
            }
            if !set.remove(&v) {
                set.insert(v);
            }
        }
        Ok(Self { couplings, sources: set.into_iter().collect() })
    }

    pub fn from_lattice(g: &GhostGraph, p: &SpinParams, sources: &[VertexId]) -> Result<Self> {
        Self::new(Couplings::from_lattice(g, p)?, sources)
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    pub fn sources(&self) -> &[VertexId] {
        &self.sources
    }

    pub fn with_sources(&self, sources: &[VertexId]) -> Result<Self> {
        Self::new(self.couplings.clone(), sources)
    }

    /// Components (of the active-edge graph) holding an odd number of
    /// sources, by smallest vertex; empty iff the measure is non-empty.
    pub fn unrealizable_components(&self) -> Vec<VertexId> {
        let comp = self.couplings.active_components();
        let mut odd = BTreeSet::new();
        for &s in &self.sources {
            if !odd.remove(&comp[s]) {
                odd.insert(comp[s]);
            }
        }
        let mut out: Vec<VertexId> =
            odd.into_iter().map(|c| (0..comp.len()).find(|&v| comp[v] == c).unwrap_or(c)).collect();
        out.sort_unstable();
        out
    }

    pub fn is_realizable(&self) -> bool {
        self.unrealizable_components().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> CurrentMeasureSpec {
        let c = Couplings::new(3, None, vec![(0, 1), (1, 2)], vec![0.5, 0.5]).unwrap();
        CurrentMeasureSpec::new(c, &[]).unwrap()
    }

    #[test]
    fn weights() {
        let s = path3();
        assert_eq!(current_weight(&Current::from_multiplicities(vec![0, 0]), &s).unwrap(), 1.0);
        let w = current_weight(&Current::from_multiplicities(vec![2, 0]), &s).unwrap();
        assert!((w - 0.125).abs() < 1e-15);
        assert!(matches!(current_weight(&Current::zero(2), &s), Err(Error::Contract(_))));
    }

    #[test]
    fn zero_field_ghost_weight_vanishes() {
        let g = GhostGraph::rectangle(1.0, 2, 1).unwrap();
        let s = CurrentMeasureSpec::from_lattice(&g, &SpinParams::critical(0.0), &[]).unwrap();
        let mut n = vec![0; g.num_edges()];
        n[g.ghost_edge(0)] = 1;
        assert_eq!(current_weight(&Current::from_multiplicities(n), &s).unwrap(), 0.0);
    }

    #[test]
    fn source_sets() {
        let ends = [(0, 1), (1, 2)];
        assert!(sources(&Current::zero(2), &ends).is_empty());
        assert_eq!(sources(&Current::from_multiplicities(vec![1, 0]), &ends), vec![0, 1]);
        assert_eq!(sources(&Current::from_multiplicities(vec![3, 1]), &ends), vec![0, 2]);
        assert_eq!(sources(&Current::from_multiplicities(vec![2, 1]), &ends), vec![1, 2]);
    }

    #[test]
    fn realizability() {
        let c = Couplings::new(4, None, vec![(0, 1), (2, 3)], vec![0.5, 0.0]).unwrap();
        let s = CurrentMeasureSpec::new(c.clone(), &[0, 1]).unwrap();
        assert!(s.is_realizable());
        let t = CurrentMeasureSpec::new(c, &[0, 2]).unwrap();
        assert_eq!(t.unrealizable_components(), vec![0, 2]);
    }

    #[test]
    fn sources_reduce_mod_two() {
        let s = path3().with_sources(&[1, 1, 2]).unwrap();
        assert_eq!(s.sources(), &[2]);
    }
}
