//! Exact check that, given the explored set, the unexplored part of the
//! current is a sourced current on the remaining graph.

use std::collections::BTreeMap;

use super::explore_backbone;
use crate::currents::{enumerate_sourced, Current, CurrentMeasureSpec};
use crate::error::{Error, Result};
use crate::lattice::{EdgeId, GhostGraph, VertexId};
use crate::law::ExactLaw;

/// Conditional law for one terminal vertex `x̃`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovGroup {
    pub end: VertexId,
    /// Probability of `{explored = F, end = x̃}`.
    pub prob: f64,
    pub tv: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovReport {
    pub prob_event: f64,
    pub groups: Vec<MarkovGroup>,
    pub max_tv: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MarkovOutcome {
    /// The explored set `F` never occurs.
    Unreachable,
    Checked(MarkovReport),
}

impl MarkovOutcome {
    pub fn max_tv(&self) -> f64 {
        match self {
            MarkovOutcome::Unreachable => 0.0,
            MarkovOutcome::Checked(r) => r.max_tv,
        }
    }
}

fn mask_of(edges: &[EdgeId]) -> Result<u64> {
    edges.iter().try_fold(0u64, |m, &e| {
        if e >= 64 {
            Err(Error::Size { what: "explored edge mask", needed: e + 1, budget: 64 })
        } else {
            Ok(m | 1 << e)
        }
    })
}

fn other_source(spec: &CurrentMeasureSpec, start: VertexId) -> Result<VertexId> {
    match spec.sources() {
        [a, b] if *a == start => Ok(*b),
        [a, b] if *b == start => Ok(*a),
        s => Err(Error::Parameter(format!("sources {s:?} must be {{start, x}} with start {start}"))),
    }
}

/// Distinct explored sets of the exact current law with sources
/// `{start, x}`, with their probabilities, in mask order.
pub fn explored_sets(
    g: &GhostGraph,
    spec: &CurrentMeasureSpec,
    start: VertexId,
    stop: &[VertexId],
) -> Result<Vec<(Vec<EdgeId>, f64)>> {
    other_source(spec, start)?;
    let law = enumerate_sourced(spec)?;
    let m = g.num_edges();
    let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
    for &(odd, p) in law.odd_sets() {
        let t = explore_backbone(g, &Current::from_masks(m, odd, 0), start, stop)?;
        *acc.entry(t.explored_mask().unwrap()).or_default() += p;
    }
    Ok(acc.into_iter().map(|(f, p)| ((0..m).filter(|&e| f >> e & 1 == 1).collect(), p)).collect())
}

/// Compares the law of the current off `F`, given that the exploration from
/// `start` up to `stop` explored exactly `F` and ended at `x̃`, with the
/// current on the graph without `F` sourced at `{x̃, x}`.
///
/// The exploration only reads odd/non-odd labels, and given the odd set the
/// even-positive labels are independent with the same probabilities in both
/// laws, so comparing the laws of the odd set off `F` is exhaustive.
pub fn verify_markov(
    g: &GhostGraph,
    spec: &CurrentMeasureSpec,
    start: VertexId,
    stop: &[VertexId],
    f: &[EdgeId],
) -> Result<MarkovOutcome> {
    let x = other_source(spec, start)?;
    let m = g.num_edges();
    let f_mask = mask_of(f)?;
    let law = enumerate_sourced(spec)?;
    let mut groups: BTreeMap<VertexId, Vec<(u64, f64)>> = BTreeMap::new();
    for &(odd, p) in law.odd_sets() {
        let t = explore_backbone(g, &Current::from_masks(m, odd, 0), start, stop)?;
        if t.explored_mask() == Some(f_mask) {
            groups.entry(t.end()).or_default().push((odd & !f_mask, p));
        }
    }
    if groups.is_empty() {
        return Ok(MarkovOutcome::Unreachable);
    }
    let off = spec.couplings().without_edges(f);
    let mut out = Vec::new();
    for (end, entries) in groups {
        let prob: f64 = entries.iter().map(|&(_, p)| p).sum();
        let conditional = ExactLaw::from_weights(m, entries)?;
        let reference = enumerate_sourced(&CurrentMeasureSpec::new(off.clone(), &[end, x])?)?;
        let reference = ExactLaw::from_weights(m, reference.odd_sets().iter().copied())?;
        out.push(MarkovGroup { end, prob, tv: conditional.tv_distance(&reference) });
    }
    let max_tv = out.iter().map(|gr| gr.tv).fold(0.0, f64::max);
    Ok(MarkovOutcome::Checked(MarkovReport { prob_event: out.iter().map(|gr| gr.prob).sum(), groups: out, max_tv }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Point;
    use crate::model::SpinParams;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn setup(h: f64) -> (GhostGraph, CurrentMeasureSpec, VertexId, Vec<VertexId>) {
        let g = GhostGraph::rectangle(1.0, 3, 2).unwrap();
        let o = g.vertex_at(Point::new(0, 0)).unwrap();
        let x = g.vertex_at(Point::new(2, 1)).unwrap();
        let spec = CurrentMeasureSpec::from_lattice(&g, &SpinParams::critical(h), &[o, x]).unwrap();
        let stop = vec![g.ghost(), x, g.vertex_at(Point::new(1, 1)).unwrap()];
        (g, spec, o, stop)
    }

    #[test]
    fn markov_on_sampled_explored_sets() {
        let (g, spec, o, stop) = setup(0.6);
        let sets = explored_sets(&g, &spec, o, &stop).unwrap();
        let total: f64 = sets.iter().map(|s| s.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let picks: Vec<_> = (0..50).map(|_| sets.choose(&mut rng).unwrap().0.clone()).collect();
        for f in picks {
            let out = verify_markov(&g, &spec, o, &stop, &f).unwrap();
            assert!(matches!(out, MarkovOutcome::Checked(_)));
            assert!(out.max_tv() < 1e-12, "tv {}", out.max_tv());
        }
    }

    #[test]
    fn full_graph_and_unreachable() {
        let (g, spec, o, _) = setup(0.3);
        let stop = [g.ghost(), g.vertex_at(Point::new(2, 1)).unwrap()];
        let all: Vec<EdgeId> = (0..g.num_edges()).collect();
        let out = verify_markov(&g, &spec, o, &stop, &all).unwrap();
        assert!(out.max_tv() < 1e-12);
        let none = verify_markov(&g, &spec, o, &stop, &[]).unwrap();
        assert_eq!(none, MarkovOutcome::Unreachable);
    }

    #[test]
    fn rejects_wrong_sources() {
        let (g, spec, _, stop) = setup(0.3);
        let other = g.vertex_at(Point::new(1, 0)).unwrap();
        assert!(verify_markov(&g, &spec, other, &stop, &[]).is_err());
    }
}
