//! Rayleigh monotonicity under cutting a quad along a path.
//!
//! `γ` joins two points of `(da)` through `T`. The cut quad `T̃` keeps the
//! vertices reachable from the corner `b` without crossing `γ` and drops the
//! edges of `γ`; its `(da)` arc is the part of `(da) ∪ γ` that remains.

use std::collections::VecDeque;

use serde::Serialize;

use super::extended_length;
use crate::error::{Error, Result};
use crate::lattice::{ArcName, Quad, VertexId};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayleighReport {
    /// `l_T((da),(bc))` and `l_{T̃}((da),(bc))`; the first is the larger.
    pub da_bc: (f64, f64),
    /// `l_T((ab),(cd))` and `l_{T̃}((ab),(cd))`; the second is the larger.
    pub ab_cd: (f64, f64),
    /// Largest violation of either inequality (≤ 0 when both hold).
    pub violation: f64,
}

/// The quad `T̃` obtained by cutting `t` along `gamma`. Vertex ids are kept;
/// vertices cut off become isolated.
pub fn cut_quad(t: &Quad, gamma: &[VertexId]) -> Result<Quad> {
    if gamma.is_empty() {
        return Ok(t.clone());
    }
    let n = t.num_vertices();
    if let Some(&v) = gamma.iter().find(|&&v| v >= n) {
        return Err(Error::Geometry(format!("cutting path vertex {v} is not in the quad")));
    }
    let da = t.arc(ArcName::Da);
    let (first, last) = (gamma[0], gamma[gamma.len() - 1]);
    if !da.contains(&first) || !da.contains(&last) {
        return Err(Error::Geometry("cutting path must start and end on (da)".into()));
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in t.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    for w in gamma.windows(2) {
        if !adj[w[0]].contains(&w[1]) {
            return Err(Error::Geometry(format!("cutting path step {} → {} is not an edge of the quad", w[0], w[1])));
        }
    }
    let mut on_gamma = vec![false; n];
    for &v in gamma {
        on_gamma[v] = true;
    }
    let b = t.arc(ArcName::Bc)[0];
    let mut keep = vec![false; n];
    keep[b] = true;
    let mut queue = VecDeque::from([b]);
    while let Some(u) = queue.pop_front() {
        if on_gamma[u] {
            continue;
        }
        for &w in &adj[u] {
            if !keep[w] {
                keep[w] = true;
                queue.push_back(w);
            }
        }
    }
    let restrict = |vs: &[VertexId]| vs.iter().copied().filter(|&v| keep[v]).collect::<Vec<_>>();
    let mut new_da: Vec<VertexId> = restrict(da);
    for &v in gamma {
        if keep[v] && !new_da.contains(&v) {
            new_da.push(v);
        }
    }
    let arcs = [restrict(t.arc(ArcName::Ab)), restrict(t.arc(ArcName::Bc)), restrict(t.arc(ArcName::Cd)), new_da];
    if let Some(name) = ArcName::ALL.into_iter().find(|a| arcs[a.index()].is_empty()) {
        return Err(Error::Geometry(format!("cutting path removes all of arc {}", name.as_str())));
    }
    let on_path = |u: VertexId, v: VertexId| gamma.windows(2).any(|w| (w[0], w[1]) == (u, v) || (w[1], w[0]) == (u, v));
    let edges = t.edges().iter().copied().filter(|&(u, v)| keep[u] && keep[v] && !on_path(u, v)).collect();
    Quad::new(t.positions().to_vec(), edges, arcs)
}

/// Extremal lengths of `t` and of its cut along `gamma`, for both arc pairs.
/// Arcs that touch have length 0 and arcs that are not joined have length
/// infinity.
pub fn rayleigh_check(t: &Quad, gamma: &[VertexId]) -> Result<RayleighReport> {
    let cut = cut_quad(t, gamma)?;
    let v = (ArcName::Da, ArcName::Bc);
    let h = (ArcName::Ab, ArcName::Cd);
    let da_bc = (extended_length(t, v)?, extended_length(&cut, v)?);
    let ab_cd = (extended_length(t, h)?, extended_length(&cut, h)?);
    let excess = |big: f64, small: f64| if big == small { 0.0 } else { small - big };
    let violation = excess(da_bc.0, da_bc.1).max(excess(ab_cd.1, ab_cd.0));
    Ok(RayleighReport { da_bc, ab_cd, violation })
}
