//! Near-critical crossing ratios on annuli and mixing ratios of local events.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{params, record, BATCHES};
use crate::error::{Error, Result};
use crate::fk::{Boundary, FkParams, SwChain, DEFAULT_BURN_IN};
use crate::lattice::{build_annulus, GhostGraph, Point, Region, VertexId};
use crate::model::{Couplings, SpinParams};
use crate::numeric::batch_mean_stderr;
use crate::record::EstimateRecord;
use crate::rng::{chain_rng, derive_seed, ChainRng};
use crate::unionfind::UnionFind;

#[derive(Clone, Debug, Default, Serialize)]
pub struct RswReport {
    /// `no_crossing` per `(n, H)`, `one_arm` per `n` and `rsw_ratio` per
    /// admissible `(n, H)`.
    pub records: Vec<EstimateRecord>,
    /// Skipped points and other warnings.
    pub notes: Vec<String>,
}

impl RswReport {
    pub fn ratios(&self) -> impl Iterator<Item = &EstimateRecord> {
        self.records.iter().filter(|r| r.observable == "rsw_ratio")
    }

    /// Every ratio satisfies `ratio + k·σ ≥ 1` and `ratio ≤ band`.
    pub fn within(&self, k: f64, band: f64) -> bool {
        self.ratios().all(|r| r.mean + k * r.stderr >= 1.0 && r.mean <= band)
    }
}

/// `A_{n,2n}` at `a = 1` with the vertex rings next to the hole and at the
/// outside.
struct Annulus {
    g: GhostGraph,
    inner: Vec<VertexId>,
    outer: Vec<VertexId>,
}

impl Annulus {
    fn new(n: usize) -> Result<Self> {
        let region = build_annulus(n as f64, 2.0 * n as f64, (0.0, 0.0), 1.0)?;
        let g = GhostGraph::from_region(1.0, &region, usize::MAX)?;
        let cut = 0.75 * n as f64;
        let sup = |v: VertexId| {
            let (x, y) = g.position(v);
            x.abs().max(y.abs())
        };
        let (inner, outer) = g.outer_boundary().into_iter().partition(|&v| sup(v) < cut);
        Ok(Self { g, inner, outer })
    }

    /// Ghost coupling of each site at field `h`.
    fn ghost_couplings(&self, h: f64) -> Result<Vec<f64>> {
        let c = Couplings::from_lattice(&self.g, &SpinParams::critical(h))?;
        Ok((0..self.g.num_sites()).map(|v| c.coupling(self.g.ghost_edge(v))).collect())
    }
}

/// `log Π_C cosh(K_C)` over the clusters of `uf`, where `K_C` is the total
/// ghost coupling of the sites of `C`. Summing out the ghost edges turns the
/// field-`H` measure into the `H = 0` measure reweighted by `Π_C cosh(K_C)`.
fn log_weight(uf: &mut UnionFind, kg: &[f64], acc: &mut [f64]) -> f64 {
    acc.iter_mut().for_each(|x| *x = 0.0);
    for (v, &k) in kg.iter().enumerate() {
        acc[uf.find(v)] += k;
    }
    acc.iter().filter(|&&k| k > 0.0).map(|&k| k.cosh().ln()).sum()
}

/// Single-edge heat bath for the jointly wired `H = 0` measure on the annulus
/// conditioned on no open lattice path between the two rings. Openings that
/// would create such a path are refused.
struct NoCrossingChain {
    ends: Vec<(VertexId, VertexId)>,
    prob: Vec<f64>,
    adj: Vec<Vec<(VertexId, usize)>>,
    /// Bit 1 marks the inner ring, bit 2 the outer ring.
    ring: Vec<u8>,
    open: Vec<bool>,
    seen: Vec<u32>,
    epoch: u32,
    stack: Vec<VertexId>,
    rng: ChainRng,
}

impl NoCrossingChain {
    fn new(an: &Annulus, p: &FkParams, seed: u64) -> Self {
        let g = &an.g;
        let m = g.num_internal_edges();
        let ends: Vec<(VertexId, VertexId)> = (0..m).map(|e| (g.edge(e).u, g.edge(e).v)).collect();
        let mut adj = vec![Vec::new(); g.num_sites()];
        for (e, &(u, v)) in ends.iter().enumerate() {
            adj[u].push((v, e));
            adj[v].push((u, e));
        }
        let mut ring = vec![0u8; g.num_sites()];
        an.inner.iter().for_each(|&v| ring[v] |= 1);
        an.outer.iter().for_each(|&v| ring[v] |= 2);
        Self {
            prob: (0..m).map(|e| p.prob(e)).collect(),
            ends,
            adj,
            ring,
            open: vec![false; m],
            seen: vec![0; g.num_sites()],
            epoch: 0,
            stack: Vec::new(),
            rng: chain_rng(seed, 0),
        }
    }

    /// Explores the open cluster of `from` without edge `skip`. Returns
    /// whether `target` was met (stopping early) and the rings touched.
    fn explore(&mut self, from: VertexId, skip: usize, target: VertexId) -> (bool, u8) {
        self.epoch += 1;
        self.stack.clear();
        self.stack.push(from);
        self.seen[from] = self.epoch;
        let mut touch = 0;
        while let Some(u) = self.stack.pop() {
            if u == target {
                return (true, touch);
            }
            touch |= self.ring[u];
            for &(w, e) in &self.adj[u] {
                if e != skip && self.open[e] && self.seen[w] != self.epoch {
                    self.seen[w] = self.epoch;
                    self.stack.push(w);
                }
            }
        }
        (false, touch)
    }

    fn sweep(&mut self) {
        for e in 0..self.ends.len() {
            let (u, v) = self.ends[e];
            let (joined, tu) = self.explore(u, e, v);
            let (tv, crossing) = if joined {
                (0, false)
            } else {
                let (_, tv) = self.explore(v, e, usize::MAX);
                (tv, tu | tv == 3)
            };
            // Both rings belong to the wired class.
            let linked = joined || (tu != 0 && tv != 0);
            let p = self.prob[e];
            let q = if linked { p } else { p / (2.0 - p) };
            self.open[e] = self.rng.gen::<f64>() < q && !crossing;
        }
    }

    fn clusters(&self, an: &Annulus) -> UnionFind {
        let mut uf = UnionFind::new(an.g.num_vertices());
        let wired: Vec<VertexId> = an.inner.iter().chain(&an.outer).copied().collect();
        for w in wired.windows(2) {
            uf.union(w[0], w[1]);
        }
        for (e, &(u, v)) in self.ends.iter().enumerate() {
            if self.open[e] {
                uf.union(u, v);
            }
        }
        uf
    }
}

/// Sweeps of the conditioned heat bath before sampling.
const CONDITIONED_BURN_IN: usize = 200;

/// `φ⁰(0 ↔ ∂Λ_n)` at `h = 0`.
fn one_arm_samples(n: usize, samples: usize, seed: u64) -> Result<Vec<f64>> {
    let g = GhostGraph::build_box(1.0, n as f64, (0.0, 0.0))?;
    let o = g.vertex_at(Point::new(0, 0)).ok_or_else(|| Error::Geometry("box misses the origin".into()))?;
    let bd = g.outer_boundary();
    let mut ch = SwChain::new(FkParams::critical(&g, 0.0)?, seed, 0);
    ch.run(DEFAULT_BURN_IN);
    Ok((0..samples)
        .map(|_| {
            ch.sweep();
            let uf = ch.clusters();
            let r = uf.find(o);
            f64::from(u8::from(bd.iter().any(|&b| uf.find(b) == r)))
        })
        .collect())
}

/// Direct no-crossing indicators at `H = 0` and, per coupling vector in
/// `kgs`, the ratio `E_0[W] / E_0[W | no crossing]` with its standard error.
fn reweighted_ratios(
    an: &Annulus,
    kgs: &[Vec<f64>],
    samples: usize,
    s_free: u64,
    s_cond: u64,
) -> Result<(Vec<f64>, Vec<(f64, f64)>)> {
    let wired: Vec<VertexId> = an.inner.iter().chain(&an.outer).copied().collect();
    let p = FkParams::new(&an.g, &SpinParams::critical(0.0), Boundary::WiredOn(wired))?;
    let mut acc = vec![0.0; an.g.num_vertices()];
    let mut ch = SwChain::new(p.clone(), s_free, 0);
    ch.run(DEFAULT_BURN_IN);
    let mut direct = Vec::with_capacity(samples);
    let mut w_all = vec![Vec::with_capacity(samples); kgs.len()];
    let mut mark = vec![false; an.g.num_vertices()];
    for _ in 0..samples {
        ch.sweep();
        let mut uf = ch.bonds().connectivity(&p, false);
        let roots: Vec<usize> = an.inner.iter().map(|&v| uf.find(v)).collect();
        roots.iter().for_each(|&r| mark[r] = true);
        let crossed = an.outer.iter().any(|&v| mark[uf.find(v)]);
        roots.iter().for_each(|&r| mark[r] = false);
        direct.push(f64::from(u8::from(!crossed)));
        let uf = ch.clusters();
        for (w, kg) in w_all.iter_mut().zip(kgs) {
            w.push(log_weight(uf, kg, &mut acc).exp());
        }
    }
    let mut cond = NoCrossingChain::new(an, &p, s_cond);
    for _ in 0..CONDITIONED_BURN_IN {
        cond.sweep();
    }
    let mut w_cond = vec![Vec::with_capacity(samples); kgs.len()];
    for _ in 0..samples {
        cond.sweep();
        let mut uf = cond.clusters(an);
        for (w, kg) in w_cond.iter_mut().zip(kgs) {
            w.push(log_weight(&mut uf, kg, &mut acc).exp());
        }
    }
    let ratios = w_all
        .iter()
        .zip(&w_cond)
        .map(|(all, cond)| {
            let (m0, e0) = batch_mean_stderr(all, BATCHES);
            let (m1, e1) = batch_mean_stderr(cond, BATCHES);
            let ratio = m0 / m1;
            (ratio, ratio * ((e0 / m0).powi(2) + (e1 / m1).powi(2)).sqrt())
        })
        .collect();
    Ok((direct, ratios))
}

/// `φ¹_{A_{n,2n},0}(Λ_n ↮ ∂Λ_{2n}) / φ¹_{A_{n,2n},H}(Λ_n ↮ ∂Λ_{2n})` at
/// `a = 1` over the grid, with both rings wired together. Points with
/// `H n² π₁(n) > eps`, where `π₁(n)` is the estimated one-arm probability,
/// are skipped with a note.
///
/// The event is far too rare to count directly, so the ratio is computed as
/// `E_0[W] / E_0[W | no crossing]` with `W = Π_C cosh(K_C)`: the first
/// factor from Swendsen–Wang samples, the second from a heat bath restricted
/// to the event.
pub fn near_critical_rsw_ratio(
    n_values: &[usize],
    h_values: &[f64],
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<RswReport> {
    if samples == 0 {
        return Err(Error::Parameter("sample budget must be >= 1".into()));
    }
    if let Some(&n) = n_values.iter().find(|&&n| n < 4) {
        return Err(Error::Parameter(format!("annulus size {n} below 4")));
    }
    if let Some(&h) = h_values.iter().find(|&&h| !(0.0..=1.0).contains(&h)) {
        return Err(Error::Parameter(format!("field {h} outside [0, 1] at a = 1")));
    }
    let per_n: Vec<RswReport> = n_values
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut rep = RswReport::default();
            let s_arm = derive_seed(seed, (3 * i) as u64);
            let arm = record("one_arm", &[("n", n as f64)], &one_arm_samples(n, samples, s_arm)?, s_arm);
            let pi1 = arm.mean;
            rep.records.push(arm);
            let mut admissible = Vec::new();
            for &h in h_values {
                let load = h * (n * n) as f64 * pi1;
                if load > eps {
                    rep.notes.push(format!("n = {n}, H = {h}: H n^2 pi_1(n) = {load:.3} exceeds {eps}; skipped"));
                } else {
                    admissible.push((h, load));
                }
            }
            let an = Annulus::new(n)?;
            if an.inner.is_empty() || an.outer.is_empty() {
                return Err(Error::Geometry(format!("annulus of inner side {n} has no hole")));
            }
            let kgs: Vec<Vec<f64>> = admissible.iter().map(|&(h, _)| an.ghost_couplings(h)).collect::<Result<_>>()?;
            let (s_free, s_cond) = (derive_seed(seed, (3 * i + 1) as u64), derive_seed(seed, (3 * i + 2) as u64));
            let (direct, ratios) = reweighted_ratios(&an, &kgs, samples, s_free, s_cond)?;
            rep.records.push(record("no_crossing", &[("H", 0.0), ("n", n as f64)], &direct, s_free));
            for (k, &(h, load)) in admissible.iter().enumerate() {
                let p = [("H", h), ("n", n as f64)];
                if h == 0.0 {
                    rep.records.push(EstimateRecord::new("rsw_ratio", params(&p), 1.0, 0.0, samples, s_cond));
                    continue;
                }
                let (ratio, se) = ratios[k];
                rep.records.push(EstimateRecord::new("rsw_ratio", params(&p), ratio, se, samples, s_cond).with_param("load", load));
            }
            Ok(rep)
        })
        .collect::<Result<_>>()?;
    let mut out = RswReport::default();
    for r in per_n {
        out.records.extend(r.records);
        out.notes.extend(r.notes);
    }
    Ok(out)
}

/// Increasing event with a local support.
#[derive(Clone, Debug, PartialEq)]
pub enum MixEvent {
    /// The vertex nearest `center` is joined to the boundary of the box of
    /// side `side` around it by open lattice edges.
    OneArm { center: (f64, f64), side: f64 },
    /// The sure event.
    Full,
}

struct Compiled {
    center: VertexId,
    ring: Vec<VertexId>,
}

/// `φ(E1 ∩ E2) / (φ(E1) φ(E2))` at `h = 0` on a free box of side `box_side`
/// with spacing `a`. One-arm supports `Λ_l(z)` need `Λ_{2l}(z₁)` and
/// `Λ_{2l}(z₂)` disjoint.
pub fn mixing_ratio(
    a: f64,
    box_side: f64,
    events: (&MixEvent, &MixEvent),
    samples: usize,
    seed: u64,
) -> Result<EstimateRecord> {
    if samples < 2 {
        return Err(Error::Parameter("sample budget must be >= 2".into()));
    }
    if let (MixEvent::OneArm { center: z1, side: l1 }, MixEvent::OneArm { center: z2, side: l2 }) = events {
        let d = (z1.0 - z2.0).abs().max((z1.1 - z2.1).abs());
        if d <= l1 + l2 {
            return Err(Error::Parameter(format!(
                "supports overlap: doubled boxes of sides {} and {} at distance {d}",
                2.0 * l1,
                2.0 * l2
            )));
        }
    }
    let g = GhostGraph::build_box(a, box_side, (0.0, 0.0))?;
    let compile = |e: &MixEvent| -> Result<Option<Compiled>> {
        match e {
            MixEvent::Full => Ok(None),
            MixEvent::OneArm { center, side } => {
                let c = g
                    .vertex_near(*center)
                    .ok_or_else(|| Error::Geometry(format!("no vertex near {center:?}")))?;
                let region = Region::square(g.position(c), *side);
                let ring = g.boundary_of(&region);
                if ring.is_empty() || ring.contains(&c) {
                    return Err(Error::Geometry(format!("event box of side {side} at {center:?} is degenerate")));
                }
                if g.vertices_in(&region).iter().any(|&v| g.degree(v) < 5) {
                    return Err(Error::Geometry(format!("event box at {center:?} leaves the domain")));
                }
                Ok(Some(Compiled { center: c, ring }))
            }
        }
    };
    let (c1, c2) = (compile(events.0)?, compile(events.1)?);
    let p = FkParams::critical(&g, 0.0)?;
    let mut ch = SwChain::new(p.clone(), seed, 0);
    ch.run(DEFAULT_BURN_IN);
    let mut e1 = Vec::with_capacity(samples);
    let mut e2 = Vec::with_capacity(samples);
    for _ in 0..samples {
        ch.sweep();
        let mut uf = ch.bonds().connectivity(&p, false);
        let mut holds = |c: &Option<Compiled>| match c {
            None => true,
            Some(c) => {
                let r = uf.find(c.center);
                c.ring.iter().any(|&v| uf.find(v) == r)
            }
        };
        e1.push(f64::from(u8::from(holds(&c1))));
        e2.push(f64::from(u8::from(holds(&c2))));
    }
    let ratio_of = |r: std::ops::Range<usize>| {
        let k = r.len() as f64;
        let (mut s1, mut s2, mut s12) = (0.0, 0.0, 0.0);
        for i in r {
            s1 += e1[i];
            s2 += e2[i];
            s12 += e1[i] * e2[i];
        }
        (s12 / k) / ((s1 / k) * (s2 / k))
    };
    let ratio = ratio_of(0..samples);
    let b = BATCHES.min(samples);
    let size = samples / b;
    let batches: Vec<f64> = (0..b).map(|i| ratio_of(i * size..(i + 1) * size)).filter(|r| r.is_finite()).collect();
    let stderr = if batches.len() >= 2 { batch_mean_stderr(&batches, batches.len()).1 } else { f64::NAN };
    if !ratio.is_finite() {
        return Err(Error::Parameter("an event never occurred; increase the budget".into()));
    }
    let (m1, m2) = (batch_mean_stderr(&e1, BATCHES).0, batch_mean_stderr(&e2, BATCHES).0);
    Ok(EstimateRecord::new("mixing_ratio", params(&[("a", a), ("box", box_side), ("p1", m1), ("p2", m2)]), ratio, stderr, samples, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// On a 3×3 box with the left and right columns wired together, the
    /// reweighted ratio matches exact enumeration of both FK measures.
    #[test]
    fn reweighting_matches_enumeration() {
        use crate::fk::{enumerate_fk, mask_connected};
        let g = GhostGraph::rectangle(1.0, 3, 3).unwrap();
        let col = |x: i32| (0..3).map(|y| g.vertex_at(Point::new(x, y)).unwrap()).collect::<Vec<_>>();
        let an = Annulus { inner: col(0), outer: col(2), g: g.clone() };
        let wired: Vec<VertexId> = an.inner.iter().chain(&an.outer).copied().collect();
        let m = g.num_internal_edges();
        let ends: Vec<(VertexId, VertexId)> = (0..m).map(|e| (g.edge(e).u, g.edge(e).v)).collect();
        let h = 0.4;
        let no_cross = |mask: u64| {
            let lattice = mask & ((1u64 << m) - 1);
            !an.inner.iter().any(|&u| an.outer.iter().any(|&v| mask_connected(&ends, g.num_sites(), lattice, u, v)))
        };
        let phi = |h: f64| {
            let p = FkParams::new(&g, &SpinParams::critical(h), Boundary::WiredOn(wired.clone())).unwrap();
            enumerate_fk(&p).unwrap().prob(no_cross)
        };
        let exact = phi(0.0) / phi(h);
        let kgs = vec![an.ghost_couplings(h).unwrap()];
        let (_, r) = reweighted_ratios(&an, &kgs, 40_000, 1, 2).unwrap();
        let (ratio, se) = r[0];
        assert!(exact > 1.0);
        assert!((ratio - exact).abs() < 3.0 * se + 1e-3, "{ratio} ± {se} vs {exact}");
    }

    #[test]
    fn zero_field_ratio_is_one() {
        let r = near_critical_rsw_ratio(&[6], &[0.0, 0.01], 1.0, 400, 3).unwrap();
        let ratios: Vec<&EstimateRecord> = r.ratios().collect();
        assert_eq!(ratios[0].mean, 1.0);
        assert_eq!(ratios[0].stderr, 0.0);
        assert!(r.within(3.0, 4.0), "{:?}", r.records);
    }

    #[test]
    fn field_raises_crossing() {
        let r = near_critical_rsw_ratio(&[6], &[0.1], f64::INFINITY, 4000, 4).unwrap();
        let ratio = r.ratios().next().unwrap();
        assert!(ratio.mean > 1.0, "{ratio:?}");
    }

    #[test]
    fn inadmissible_points_are_skipped() {
        let r = near_critical_rsw_ratio(&[8], &[1.0], 0.5, 100, 1).unwrap();
        assert_eq!(r.ratios().count(), 0);
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn full_event_gives_one() {
        let e = MixEvent::OneArm { center: (-3.0, 0.0), side: 2.0 };
        let r = mixing_ratio(1.0, 12.0, (&e, &MixEvent::Full), 500, 2).unwrap();
        assert_eq!(r.mean, 1.0);
    }

    #[test]
    fn distant_arms_are_positively_correlated() {
        let e1 = MixEvent::OneArm { center: (-3.0, 0.0), side: 2.0 };
        let e2 = MixEvent::OneArm { center: (3.0, 0.0), side: 2.0 };
        let r = mixing_ratio(1.0, 14.0, (&e1, &e2), 20_000, 5).unwrap();
        assert!(r.mean >= 1.0 - 3.0 * r.stderr, "{r:?}");
        assert!(r.mean <= 2.0, "{r:?}");
    }

    #[test]
    fn overlapping_supports_rejected() {
        let e1 = MixEvent::OneArm { center: (-1.0, 0.0), side: 2.0 };
        let e2 = MixEvent::OneArm { center: (1.0, 0.0), side: 2.0 };
        assert!(matches!(mixing_ratio(1.0, 12.0, (&e1, &e2), 100, 1), Err(Error::Parameter(_))));
    }
}
