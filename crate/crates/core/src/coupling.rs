//! Cross-representation identities: the Bernoulli overlay of a traced current
//! and the truncated two-point identity.

use rand::Rng;
use serde::Serialize;

use crate::currents::{enumerate_double, enumerate_sourced, CurrentMeasureSpec};
use crate::error::{Error, Result};
use crate::fk::{enumerate_fk, is_increasing, mask_connected, BondConfig, FkParams};
use crate::ising_exact;
use crate::lattice::{EdgeId, GhostGraph, VertexId};
use crate::law::{expand_mask, subset_sum_transform, ExactLaw};
use crate::model::{Couplings, FieldSchedule, SpinParams};
use crate::rng::chain_rng;

/// Overlay probability `1 − e^{−K_e}` per edge.
pub fn overlay_probs(c: &Couplings) -> Vec<f64> {
    c.couplings().iter().map(|&k| -(-k).exp_m1()).collect()
}

/// `ω(e) = max(n̂(e), X(e))` with independent `X(e) ~ Bernoulli(1 − e^{−K_e})`.
pub fn overlay_couple(traced: &BondConfig, p: &FkParams, seed: u64) -> Result<BondConfig> {
    if traced.len() != p.num_edges() {
        return Err(Error::Parameter(format!("traced current has {} edges, graph has {}", traced.len(), p.num_edges())));
    }
    let q = overlay_probs(p.couplings());
    let mut rng = chain_rng(seed, 0);
    let bits = traced.bits().iter().zip(&q).map(|(&open, &qe)| rng.gen::<f64>() < qe || open).collect();
    Ok(BondConfig::from_bits(bits))
}

/// Exact law of `n̂ ∨ X` for `n̂` from the traced current with sources
/// `{x, y}`.
pub fn overlay_law(spec: &CurrentMeasureSpec) -> Result<ExactLaw> {
    let traced = enumerate_sourced(spec)?.trace_law()?;
    let c = spec.couplings();
    let active = c.active_edges();
    let m = active.len();
    let q: Vec<f64> = overlay_probs(c).into_iter().enumerate().filter(|(e, _)| active.contains(e)).map(|(_, v)| v).collect();
    let mut f = vec![0.0; 1 << m];
    for &(mask, prob) in traced.entries() {
        let compact = active.iter().enumerate().filter(|(_, &e)| mask >> e & 1 == 1).fold(0usize, |a, (i, _)| a | 1 << i);
        let denom: f64 = (0..m).filter(|&i| compact >> i & 1 == 1).map(|i| q[i]).product();
        f[compact] += prob / denom;
    }
    subset_sum_transform(&mut f);
    let weights = f.iter().enumerate().map(|(w, &s)| {
        let base: f64 = (0..m).map(|i| if w >> i & 1 == 1 { q[i] } else { 1.0 - q[i] }).product();
        (expand_mask(w as u64, &active), base * s)
    });
    ExactLaw::from_weights(c.num_edges(), weights)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub prob_connected: f64,
    pub tv: f64,
}

/// Compares the overlay law with the free FK measure conditioned on
/// `{x ↔ y}` (connections may pass through the ghost). `None` when the
/// connection has probability zero.
pub fn verify_coupling_law(c: &Couplings, x: VertexId, y: VertexId) -> Result<Option<CouplingReport>> {
    let fk = FkParams::from_couplings(c.clone(), Vec::new())?;
    let law = enumerate_fk(&fk)?;
    let n = c.num_vertices();
    let ends = c.all_ends().to_vec();
    let connected = |m: u64| mask_connected(&ends, n, m, x, y);
    let prob_connected = law.prob(connected);
    let Some(cond) = law.condition(connected) else { return Ok(None) };
    let spec = CurrentMeasureSpec::new(c.clone(), &[x, y])?;
    if !spec.is_realizable() {
        return Ok(None);
    }
    let overlay = overlay_law(&spec)?;
    Ok(Some(CouplingReport { prob_connected, tv: overlay.tv_distance(&cond) }))
}

/// The complement of a union of single-edge-open events and connection
/// events; always decreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct DecreasingEvent {
    pub closed_edges: Vec<EdgeId>,
    pub disconnected: Vec<(VertexId, VertexId)>,
}

impl DecreasingEvent {
    pub fn random<R: Rng>(rng: &mut R, c: &Couplings) -> Self {
        let m = c.num_edges();
        let n = c.num_vertices();
        let closed_edges = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..m)).collect();
        let disconnected = (0..rng.gen_range(1..=2)).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        Self { closed_edges, disconnected }
    }

    pub fn holds(&self, c: &Couplings, mask: u64) -> bool {
        let ends = c.all_ends();
        self.closed_edges.iter().all(|&e| mask >> e & 1 == 0)
            && self.disconnected.iter().all(|&(u, v)| !mask_connected(ends, c.num_vertices(), mask, u, v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationReport {
    pub traced_prob: f64,
    pub fk_prob: f64,
}

/// `P̂^{x,y}(A)` and `φ(A | x ↔ y)` for a decreasing event `A`, after
/// checking that `A` is decreasing.
pub fn decreasing_domination(c: &Couplings, x: VertexId, y: VertexId, a: &DecreasingEvent) -> Result<DominationReport> {
    let edges: Vec<EdgeId> = (0..c.num_edges()).collect();
    if !is_increasing(&edges, |m| !a.holds(c, m)) {
        return Err(Error::Contract("event is not decreasing".into()));
    }
    let spec = CurrentMeasureSpec::new(c.clone(), &[x, y])?;
    let traced = enumerate_sourced(&spec)?.trace_law()?;
    let fk = enumerate_fk(&FkParams::from_couplings(c.clone(), Vec::new())?)?;
    let n = c.num_vertices();
    let ends = c.all_ends().to_vec();
    let cond = fk
        .condition(|m| mask_connected(&ends, n, m, x, y))
        .ok_or_else(|| Error::Contract("connection has probability zero".into()))?;
    Ok(DominationReport { traced_prob: traced.prob(|m| a.holds(c, m)), fk_prob: cond.prob(|m| a.holds(c, m)) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationReport {
    pub truncated: f64,
    pub correlation: f64,
    /// `(P̂^{0,x} ⊗ P̂^∅)(0 ↮ g)`.
    pub no_ghost_prob: f64,
    pub identity_gap: f64,
}

/// `⟨σ_0;σ_x⟩ = ⟨σ_0σ_x⟩ · (P̂^{0,x} ⊗ P̂^∅)(0 ↮ g)` on a ghost graph.
pub fn truncation_identity(c: &Couplings, o: VertexId, x: VertexId) -> Result<TruncationReport> {
    let g = c.ghost().ok_or_else(|| Error::Parameter("truncation identity needs a ghost".into()))?;
    let truncated = ising_exact::truncated(c, o, x)?;
    let correlation = ising_exact::correlations(c, &[vec![o, x]])?[0];
    let spec_a = CurrentMeasureSpec::new(c.clone(), &[o, x])?;
    let spec_b = CurrentMeasureSpec::new(c.clone(), &[])?;
    let no_ghost_prob = if spec_a.is_realizable() {
        let double = enumerate_double(&spec_a, &spec_b)?;
        let ends = c.all_ends().to_vec();
        double.prob(|m| !mask_connected(&ends, c.num_vertices(), m, o, g))
    } else {
        0.0
    };
    Ok(TruncationReport { truncated, correlation, no_ghost_prob, identity_gap: (truncated - correlation * no_ghost_prob).abs() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationCheck {
    pub identity: TruncationReport,
    /// `⟨σ_0;σ_x⟩` with the uniform field `max h⃗`.
    pub uniform_truncated: f64,
    pub monotone: bool,
}

/// The identity under the field `p` and the comparison with the uniform
/// field of the same strength: `⟨σ_0;σ_x⟩_h ≤ ⟨σ_0;σ_x⟩_{h⃗}`.
pub fn verify_truncation_identity(g: &GhostGraph, o: VertexId, x: VertexId, p: &SpinParams) -> Result<TruncationCheck> {
    let c = Couplings::from_lattice(g, p)?;
    let identity = truncation_identity(&c, o, x)?;
    let uniform = SpinParams { beta: p.beta, field: FieldSchedule::Uniform(p.field.max_field()) };
    let uniform_truncated = ising_exact::exact_truncated(g, o, x, &uniform)?;
    Ok(TruncationCheck { monotone: uniform_truncated <= identity.truncated + 1e-12, identity, uniform_truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Point;
    use crate::model::beta_critical;
    use rand::SeedableRng;

    fn one_edge(k: f64) -> Couplings {
        Couplings::new(2, None, vec![(0, 1)], vec![k]).unwrap()
    }

    #[test]
    fn overlay_trivial_cases() {
        let c = Couplings::new(2, None, vec![(0, 1)], vec![0.0]).unwrap();
        let fk = FkParams::from_couplings(c, Vec::new()).unwrap();
        let traced = BondConfig::from_bits(vec![false]);
        assert_eq!(overlay_couple(&traced, &fk, 1).unwrap(), traced);
        let fk = FkParams::from_couplings(one_edge(0.7), Vec::new()).unwrap();
        let open = BondConfig::from_bits(vec![true]);
        assert_eq!(overlay_couple(&open, &fk, 1).unwrap(), open);
    }

    #[test]
    fn overlay_marginal() {
        let k = 0.6;
        let fk = FkParams::from_couplings(one_edge(k), Vec::new()).unwrap();
        let closed = BondConfig::closed(1);
        let n = 100_000;
        let hits = (0..n).filter(|&s| overlay_couple(&closed, &fk, s as u64).unwrap().is_open(0)).count();
        let q = 1.0 - (-k).exp();
        let se = (q * (1.0 - q) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - q).abs() < 3.0 * se);
    }

    #[test]
    fn one_edge_coupling_exact() {
        let r = verify_coupling_law(&one_edge(beta_critical()), 0, 1).unwrap().unwrap();
        assert!(r.tv < 1e-12);
    }

    #[test]
    fn small_box_coupling_exact() {
        let g = GhostGraph::rectangle(1.0, 2, 2).unwrap();
        let c = Couplings::from_lattice(&g, &SpinParams::critical(0.2)).unwrap();
        for (x, y) in [(0, 3), (0, 1), (1, g.ghost())] {
            let r = verify_coupling_law(&c, x, y).unwrap().unwrap();
            assert!(r.tv < 1e-10, "tv {} for ({x},{y})", r.tv);
        }
    }

    #[test]
    fn disconnected_pair_is_empty() {
        let c = Couplings::new(3, None, vec![(0, 1)], vec![0.5]).unwrap();
        assert_eq!(verify_coupling_law(&c, 0, 2).unwrap(), None);
    }

    #[test]
    fn decreasing_events_dominated() {
        let g = GhostGraph::rectangle(1.0, 2, 2).unwrap();
        let c = Couplings::from_lattice(&g, &SpinParams::critical(0.2)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = DecreasingEvent::random(&mut rng, &c);
            let r = decreasing_domination(&c, 0, 3, &a).unwrap();
            assert!(r.traced_prob - r.fk_prob >= -1e-12, "{r:?} for {a:?}");
        }
    }

    #[test]
    fn zero_field_identity_is_trivial() {
        let g = GhostGraph::rectangle(1.0, 2, 2).unwrap();
        let c = Couplings::from_lattice(&g, &SpinParams::critical(0.0)).unwrap();
        let r = truncation_identity(&c, 0, 3).unwrap();
        assert!((r.no_ghost_prob - 1.0).abs() < 1e-12);
        assert!(r.identity_gap < 1e-12);
    }

    #[test]
    fn path_with_middle_field() {
        let g = GhostGraph::rectangle(1.0, 3, 1).unwrap();
        let p = SpinParams { beta: beta_critical(), field: FieldSchedule::PerVertex(vec![0.0, 0.3, 0.0]) };
        let o = g.vertex_at(Point::new(0, 0)).unwrap();
        let x = g.vertex_at(Point::new(2, 0)).unwrap();
        let check = verify_truncation_identity(&g, o, x, &p).unwrap();
        assert!(check.identity.identity_gap < 1e-10);
        assert!(check.identity.no_ghost_prob < 1.0);
        assert!(check.monotone);
    }

    #[test]
    fn zeroed_field_dominates_uniform() {
        let g = GhostGraph::build_box(1.0, 2.0, (0.0, 0.0)).unwrap();
        let o = g.vertex_at(Point::new(-1, 0)).unwrap();
        let x = g.vertex_at(Point::new(1, 0)).unwrap();
        for h in [0.1, 0.5, 1.0] {
            let p = SpinParams {
                beta: beta_critical(),
                field: FieldSchedule::ZeroedNear { h, points: vec![(-1.0, 0.0), (1.0, 0.0)], radius: 0.0 },
            };
            let check = verify_truncation_identity(&g, o, x, &p).unwrap();
            assert!(check.identity.identity_gap < 1e-10);
            assert!(check.monotone, "{check:?}");
        }
    }
}
