//! Discrete extremal length of quads.
//!
//! For an edge metric `g ≥ 0` the functional is `(inf_γ Σ_{e∈γ} g_e)² / Σ g_e²`
//! over paths `γ` joining two arcs, and the extremal length is its supremum.
//! With unit edge weights it equals the effective resistance between the two
//! arcs, each shorted to a single node, which is what [`extremal_length`]
//! computes. [`extremal_length_oracle`] optimizes the metric directly.

mod oracle;
mod rayleigh;

pub use oracle::{extremal_length_oracle, oracle_solve, OracleSolution, ORACLE_EDGE_BUDGET};
pub use rayleigh::{cut_quad, rayleigh_check, RayleighReport};

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fk::{FkParams, SwChain, DEFAULT_BURN_IN};
use crate::lattice::{ArcName, GhostGraph, Quad, VertexId};
use crate::numeric::batch_mean_stderr;
use crate::record::EstimateRecord;

/// Relative residual at which the conjugate-gradient solve stops.
pub const CG_TOLERANCE: f64 = 1e-10;

/// Nonnegative edge weights, not all zero.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMetric {
    g: Vec<f64>,
}

impl EdgeMetric {
    pub fn new(g: Vec<f64>) -> Result<Self> {
        if let Some(e) = g.iter().position(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::Parameter(format!("metric value {} on edge {e} is not a finite nonnegative number", g[e])));
        }
        if !g.iter().any(|&x| x > 0.0) {
            return Err(Error::Parameter("metric is identically zero".into()));
        }
        Ok(Self { g })
    }

    pub fn values(&self) -> &[f64] {
        &self.g
    }

    /// `Σ g_e²`.
    pub fn area(&self) -> f64 {
        self.g.iter().map(|x| x * x).sum()
    }

    pub fn scaled(&self, s: f64) -> Result<EdgeMetric> {
        EdgeMetric::new(self.g.iter().map(|x| x * s).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthReport {
    pub length: f64,
    pub method: &'static str,
    pub residual: f64,
}

/// Arc vertex sets for `pair`, checked to be opposite, nonempty, disjoint
/// and joined by a path.
pub(crate) struct Terminals {
    /// `Some(true)` on one arc, `Some(false)` on the other.
    pub side: Vec<Option<bool>>,
    pub adj: Vec<Vec<(VertexId, usize)>>,
}

pub(crate) fn terminals(q: &Quad, pair: (ArcName, ArcName)) -> Result<Terminals> {
    match classify(q, pair)? {
        Ok(t) => Ok(t),
        Err(Degenerate::Shared(v)) => Err(Error::Geometry(format!(
            "arcs {} and {} share vertex {v}",
            pair.0.as_str(),
            pair.1.as_str()
        ))),
        Err(Degenerate::Disconnected) => {
            Err(Error::Geometry(format!("arcs {} and {} are not connected", pair.0.as_str(), pair.1.as_str())))
        }
    }
}

enum Degenerate {
    Shared(VertexId),
    Disconnected,
}

fn classify(q: &Quad, pair: (ArcName, ArcName)) -> Result<std::result::Result<Terminals, Degenerate>> {
    if pair.1 != pair.0.opposite() {
        return Err(Error::Parameter(format!("arcs {} and {} are not opposite", pair.0.as_str(), pair.1.as_str())));
    }
    let n = q.num_vertices();
    // The arc holding the least vertex id is the high side, so a quad and
    // its relabelled mirror solve the same system.
    let (hi, lo) = if q.arc(pair.0).iter().min() <= q.arc(pair.1).iter().min() { (pair.0, pair.1) } else { (pair.1, pair.0) };
    let mut side = vec![None; n];
    for &v in q.arc(hi) {
        side[v] = Some(true);
    }
    for &v in q.arc(lo) {
        if side[v] == Some(true) {
            return Ok(Err(Degenerate::Shared(v)));
        }
        side[v] = Some(false);
    }
    let mut adj = vec![Vec::new(); n];
    for (e, &(u, v)) in q.edges().iter().enumerate() {
        adj[u].push((v, e));
        adj[v].push((u, e));
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<VertexId> = q.arc(hi).iter().copied().collect();
    for &v in &queue {
        seen[v] = true;
    }
    let mut joined = false;
    while let Some(u) = queue.pop_front() {
        if side[u] == Some(false) {
            joined = true;
            break;
        }
        for &(w, _) in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    if !joined {
        return Ok(Err(Degenerate::Disconnected));
    }
    Ok(Ok(Terminals { side, adj }))
}

/// Conjugate gradients for the Dirichlet problem `u = 1` on the high arc,
/// `u = 0` on the other, harmonic elsewhere. Returns the potential and the
/// final relative residual.
fn dirichlet(t: &Terminals) -> Result<(Vec<f64>, f64)> {
    let n = t.side.len();
    // Free vertices in components that meet an arc; others carry no current.
    let mut anchored = vec![false; n];
    let mut queue: VecDeque<VertexId> = (0..n).filter(|&v| t.side[v].is_some()).collect();
    for &v in &queue {
        anchored[v] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &(w, _) in &t.adj[u] {
            if !anchored[w] {
                anchored[w] = true;
                queue.push_back(w);
            }
        }
    }
    let free: Vec<VertexId> = (0..n).filter(|&v| anchored[v] && t.side[v].is_none()).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in free.iter().enumerate() {
        slot[v] = i;
    }
    let k = free.len();
    let mut b = vec![0.0; k];
    for (i, &v) in free.iter().enumerate() {
        b[i] = t.adj[v].iter().filter(|&&(w, _)| t.side[w] == Some(true)).count() as f64;
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for (i, &v) in free.iter().enumerate() {
            let mut s = t.adj[v].len() as f64 * x[i];
            for &(w, _) in &t.adj[v] {
                if slot[w] != usize::MAX {
                    s -= x[slot[w]];
                }
            }
            out[i] = s;
        }
    };
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
    let bnorm = dot(&b, &b).sqrt();
    let mut x = vec![0.0; k];
    let mut residual = 0.0;
    if bnorm > 0.0 {
        let mut r = b.clone();
        let mut p = r.clone();
        let mut ap = vec![0.0; k];
        let mut rr = dot(&r, &r);
        let cap = 10 * k + 1000;
        let mut it = 0;
        while rr.sqrt() > CG_TOLERANCE * bnorm {
            if it == cap {
                return Err(Error::Convergence { iterations: it, residual: rr.sqrt() / bnorm });
            }
            apply(&p, &mut ap);
            let alpha = rr / dot(&p, &ap);
            for i in 0..k {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let next = dot(&r, &r);
            let beta = next / rr;
            rr = next;
            for i in 0..k {
                p[i] = r[i] + beta * p[i];
            }
            it += 1;
        }
        residual = rr.sqrt() / bnorm;
    }
    let u = (0..n)
        .map(|v| match t.side[v] {
            Some(true) => 1.0,
            Some(false) => 0.0,
            None if slot[v] != usize::MAX => x[slot[v]],
            None => 0.0,
        })
        .collect();
    Ok((u, residual))
}

/// Extremal length between two opposite arcs as an effective resistance,
/// with the residual of the linear solve.
pub fn extremal_length_report(q: &Quad, pair: (ArcName, ArcName)) -> Result<LengthReport> {
    let t = terminals(q, pair)?;
    let (u, residual) = dirichlet(&t)?;
    let energy: f64 = q.edges().iter().map(|&(a, b)| (u[a] - u[b]).powi(2)).sum();
    Ok(LengthReport { length: 1.0 / energy, method: "dirichlet", residual })
}

pub fn extremal_length(q: &Quad, pair: (ArcName, ArcName)) -> Result<f64> {
    Ok(extremal_length_report(q, pair)?.length)
}

/// As [`extremal_length`], with 0 for arcs that share a vertex and infinity
/// for arcs that are not joined.
pub fn extended_length(q: &Quad, pair: (ArcName, ArcName)) -> Result<f64> {
    match classify(q, pair)? {
        Ok(_) => extremal_length(q, pair),
        Err(Degenerate::Shared(_)) => Ok(0.0),
        Err(Degenerate::Disconnected) => Ok(f64::INFINITY),
    }
}

/// Multi-source shortest path between the two arcs under `g`.
/// Vertices are settled in order of distance, then id; predecessors prefer
/// the smaller edge id on ties. Returns the length and the path's edges.
pub(crate) fn shortest_crossing(t: &Terminals, g: &[f64]) -> (f64, Vec<usize>) {
    let n = t.side.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<(VertexId, usize)>> = vec![None; n];
    let mut done = vec![false; n];
    for v in 0..n {
        if t.side[v] == Some(true) {
            dist[v] = 0.0;
        }
    }
    loop {
        let mut best: Option<VertexId> = None;
        for v in 0..n {
            if !done[v] && dist[v].is_finite() && best.map_or(true, |b| dist[v] < dist[b]) {
                best = Some(v);
            }
        }
        let Some(u) = best else { break };
        done[u] = true;
        for &(w, e) in &t.adj[u] {
            if done[w] {
                continue;
            }
            let d = dist[u] + g[e];
            let better = d < dist[w] || (d == dist[w] && pred[w].map_or(false, |(_, pe)| e < pe));
            if better {
                dist[w] = d;
                pred[w] = Some((u, e));
            }
        }
    }
    let target = (0..n).filter(|&v| t.side[v] == Some(false)).fold(None, |acc: Option<VertexId>, v| match acc {
        Some(b) if dist[b] <= dist[v] => Some(b),
        _ => Some(v),
    });
    let Some(mut v) = target else { return (f64::INFINITY, Vec::new()) };
    let len = dist[v];
    let mut path = Vec::new();
    while let Some((u, e)) = pred[v] {
        path.push(e);
        v = u;
    }
    path.sort_unstable();
    (len, path)
}

/// `(inf_γ Σ_{e∈γ} g_e)² / Σ g_e²` for paths between the arcs of `pair`.
pub fn metric_functional(q: &Quad, pair: (ArcName, ArcName), metric: &EdgeMetric) -> Result<f64> {
    if metric.values().len() != q.num_edges() {
        return Err(Error::Parameter(format!(
            "metric has {} entries, quad has {} edges",
            metric.values().len(),
            q.num_edges()
        )));
    }
    let t = terminals(q, pair)?;
    let (len, _) = shortest_crossing(&t, metric.values());
    Ok(len * len / metric.area())
}

/// Extremal length of the lattice rectangle `g` between its left and right
/// sides, paired with the Monte Carlo probability under `p` that the sides
/// are joined by open internal edges.
pub fn crossing_vs_length(
    g: &GhostGraph,
    p: &FkParams,
    n_samples: usize,
    seed: u64,
) -> Result<(EstimateRecord, EstimateRecord)> {
    if n_samples == 0 {
        return Err(Error::Parameter("n_samples must be >= 1".into()));
    }
    if p.num_vertices() != g.num_vertices() || p.num_edges() != g.num_edges() {
        return Err(Error::Parameter("FK parameters do not match the graph".into()));
    }
    let q = Quad::from_lattice(g)?;
    let pair = (ArcName::Ab, ArcName::Cd);
    let length = extremal_length(&q, pair)?;
    let left: Vec<VertexId> = q.arc(ArcName::Ab).to_vec();
    let right: Vec<VertexId> = q.arc(ArcName::Cd).to_vec();
    let mut chain = SwChain::new(p.clone(), seed, 0);
    chain.run(DEFAULT_BURN_IN);
    let mut xs = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        chain.sweep();
        let mut uf = chain.bonds().connectivity(p, false);
        let roots: Vec<usize> = left.iter().map(|&v| uf.find(v)).collect();
        let hit = right.iter().any(|&v| roots.contains(&uf.find(v)));
        xs.push(if hit { 1.0 } else { 0.0 });
    }
    let (mean, stderr) = batch_mean_stderr(&xs, 20);
    let pts = g.points();
    let span = |f: fn(&crate::lattice::Point) -> i32| {
        let (lo, hi) = pts.iter().map(f).fold((i32::MAX, i32::MIN), |(a, b), x| (a.min(x), b.max(x)));
        (hi - lo) as f64
    };
    let mut params = BTreeMap::new();
    params.insert("a".to_string(), g.spacing());
    params.insert("width".to_string(), span(|p| p.x));
    params.insert("height".to_string(), span(|p| p.y));
    Ok((
        EstimateRecord::new("extremal_length", params.clone(), length, 0.0, 1, seed),
        EstimateRecord::new("crossing_prob", params, mean, stderr, n_samples, seed),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fk::Boundary;
    use crate::model::SpinParams;

    pub(crate) fn single_edge() -> Quad {
        Quad::new(vec![(0.0, 0.0), (1.0, 0.0)], vec![(0, 1)], [vec![0], vec![0, 1], vec![1], vec![1, 0]]).unwrap()
    }

    pub(crate) fn parallel() -> Quad {
        Quad::new(
            vec![(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)],
            vec![(0, 2), (1, 3)],
            [vec![1, 0], vec![0, 2], vec![2, 3], vec![3, 1]],
        )
        .unwrap()
    }

    pub(crate) fn series() -> Quad {
        Quad::new(
            vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            vec![(0, 1), (1, 2)],
            [vec![0], vec![0, 1, 2], vec![2], vec![2, 1, 0]],
        )
        .unwrap()
    }

    const H: (ArcName, ArcName) = (ArcName::Ab, ArcName::Cd);
    const V: (ArcName, ArcName) = (ArcName::Bc, ArcName::Da);

    #[test]
    fn closed_forms() {
        assert!((extremal_length(&single_edge(), H).unwrap() - 1.0).abs() < 1e-12);
        assert!((extremal_length(&parallel(), H).unwrap() - 0.5).abs() < 1e-12);
        assert!((extremal_length(&series(), H).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_lengths() {
        // A w × h grid of vertices between its left and right sides: h
        // parallel rows of w − 1 series edges, vertical rungs carry no current.
        for (w, h) in [(2, 2), (3, 2), (5, 3), (4, 6)] {
            let q = Quad::grid(w, h).unwrap();
            let l = extremal_length(&q, H).unwrap();
            assert!((l - (w - 1) as f64 / h as f64).abs() < 1e-9, "{w}×{h}: {l}");
        }
    }

    #[test]
    fn errors() {
        let q = Quad::grid(3, 3).unwrap();
        assert!(matches!(extremal_length(&q, (ArcName::Ab, ArcName::Bc)), Err(Error::Parameter(_))));
        // (bc) and (da) of the single edge share both vertices.
        assert!(matches!(extremal_length(&single_edge(), V), Err(Error::Geometry(_))));
        let cut = q.without_edges(&(0..q.num_edges()).collect::<Vec<_>>());
        assert!(matches!(extremal_length(&cut, H), Err(Error::Geometry(_))));
        assert!(EdgeMetric::new(vec![0.0, 0.0]).is_err());
        assert!(EdgeMetric::new(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn metric_functional_bounded_by_length() {
        let q = Quad::grid(4, 3).unwrap();
        let l = extremal_length(&q, H).unwrap();
        let unit = EdgeMetric::new(vec![1.0; q.num_edges()]).unwrap();
        let f = metric_functional(&q, H, &unit).unwrap();
        assert!(f <= l + 1e-12);
        assert!((metric_functional(&q, H, &unit.scaled(3.5).unwrap()).unwrap() - f).abs() < 1e-12);
    }

    #[test]
    fn duality_product_on_grids() {
        for (w, h) in [(2, 2), (3, 2), (4, 3), (5, 5), (6, 3)] {
            let q = Quad::grid(w, h).unwrap();
            let d = q.dual().unwrap();
            let prod = extremal_length(&q, H).unwrap() * extremal_length(&d, H).unwrap();
            assert!((prod - 1.0).abs() < 1e-6, "{w}×{h}: {prod}");
            let prod = extremal_length(&q, V).unwrap() * extremal_length(&d, V).unwrap();
            assert!((prod - 1.0).abs() < 1e-6, "{w}×{h} vertical: {prod}");
        }
    }

    #[test]
    fn mirror_image_has_same_length() {
        let q = Quad::grid(4, 3).unwrap().without_edges(&[2, 7]);
        let pos: Vec<(f64, f64)> = q.positions().iter().map(|&(x, y)| (-x, y)).collect();
        let [ab, bc, cd, da] = q.arcs().clone();
        let rev = |v: Vec<VertexId>| v.into_iter().rev().collect::<Vec<_>>();
        let m = Quad::new(pos, q.edges().to_vec(), [rev(cd), rev(bc), rev(ab), rev(da)]).unwrap();
        m.check_planar().unwrap();
        assert_eq!(extremal_length(&q, H).unwrap(), extremal_length(&m, H).unwrap());
    }

    #[test]
    fn one_edge_crossing() {
        let g = GhostGraph::rectangle(1.0, 2, 1).unwrap();
        let wired = FkParams::new(&g, &SpinParams::critical(0.0), Boundary::WiredOn(vec![0, 1])).unwrap();
        let pe = wired.prob(0);
        let (l, c) = crossing_vs_length(&g, &wired, 40_000, 3).unwrap();
        assert_eq!(l.mean, 1.0);
        assert!((c.mean - pe).abs() < 4.0 * c.stderr.max(1e-3), "{} vs {pe}", c.mean);
        // Free boundary: the open edge saves a cluster, so P(open) = p/(2 − p).
        let free = FkParams::critical(&g, 0.0).unwrap();
        let (_, c) = crossing_vs_length(&g, &free, 40_000, 3).unwrap();
        let exact = pe / (2.0 - pe);
        assert!((c.mean - exact).abs() < 4.0 * c.stderr.max(1e-3), "{} vs {exact}", c.mean);
    }

    #[test]
    fn longer_rectangles_cross_less() {
        let mut prev: Option<(f64, f64)> = None;
        for w in [6usize, 11, 16] {
            let g = GhostGraph::rectangle(1.0, w, 6).unwrap();
            let p = FkParams::critical(&g, 0.0).unwrap();
            let (l, c) = crossing_vs_length(&g, &p, 4000, 9).unwrap();
            if let Some((pl, pc)) = prev {
                assert!(l.mean > pl);
                assert!(c.mean < pc);
            }
            prev = Some((l.mean, c.mean));
        }
    }
}
