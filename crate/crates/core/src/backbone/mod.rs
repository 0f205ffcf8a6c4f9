//! Deterministic backbone exploration of a sourced current.
//!
//! From the current vertex the exploration inspects the ghost edge first and
//! then the lattice edges turning right, left and straight relative to the
//! incoming edge. It walks along the first odd edge not yet explored, and
//! every edge inspected on the way is added to the explored set.

mod domain;
mod markov;

pub use domain::{boundary_ring, explored_domain, ExploredDomain};
pub use markov::{explored_sets, verify_markov, MarkovGroup, MarkovOutcome, MarkovReport};

use serde::Serialize;

use crate::currents::Current;
use crate::error::{Error, Result};
use crate::lattice::{Direction, EdgeId, GhostGraph, VertexId};

/// Edges at `v` in exploration order.
///
/// With no incoming edge (the start vertex) the order is ghost, E, N, W, S.
/// Otherwise it is ghost, right, left, straight, where right is the clockwise
/// rotation of the direction of travel. Absent edges are skipped.
pub fn edge_order_at(g: &GhostGraph, v: VertexId, incoming: Option<EdgeId>) -> Result<Vec<EdgeId>> {
    if g.is_ghost(v) {
        return Err(Error::Contract("edge order requested at the ghost".into()));
    }
    let mut order = vec![g.ghost_edge(v)];
    let dirs: Vec<Direction> = match incoming {
        None => Direction::ALL.to_vec(),
        Some(e) => {
            if e >= g.num_edges() || !g.incident(v).contains(&e) {
                return Err(Error::Contract(format!("edge {e} is not incident to vertex {v}")));
            }
            let from = g.other_end(e, v);
            let travel = g
                .direction_from(e, from)
                .ok_or_else(|| Error::Contract(format!("incoming edge {e} at {v} is a ghost edge")))?;
            vec![travel.clockwise(), travel.counterclockwise(), travel]
        }
    };
    order.extend(dirs.into_iter().filter_map(|d| g.lattice_edge(v, d)));
    Ok(order)
}

/// Outcome of one exploration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackboneTrace {
    /// Explored edges in order of first inspection.
    explored: Vec<EdgeId>,
    /// `|S_i|` for `i = 0, 1, …, end`.
    step_sizes: Vec<usize>,
    path: Vec<VertexId>,
    path_edges: Vec<EdgeId>,
    stop: Vec<VertexId>,
    hit_ghost: bool,
    #[serde(skip)]
    in_explored: Vec<bool>,
}

impl BackboneTrace {
    /// The explored set `S_i` as a prefix of the exploration order.
    pub fn step(&self, i: usize) -> &[EdgeId] {
        let i = i.min(self.step_sizes.len() - 1);
        &self.explored[..self.step_sizes[i]]
    }

    /// Number of vertex steps taken (path length in edges).
    pub fn num_steps(&self) -> usize {
        self.path_edges.len()
    }

    pub fn step_sizes(&self) -> &[usize] {
        &self.step_sizes
    }

    /// Terminal explored set.
    pub fn explored(&self) -> &[EdgeId] {
        &self.explored
    }

    pub fn is_explored(&self, e: EdgeId) -> bool {
        self.in_explored.get(e).copied().unwrap_or(false)
    }

    pub fn explored_mask(&self) -> Option<u64> {
        if self.in_explored.len() > 64 {
            return None;
        }
        Some(self.explored.iter().fold(0, |m, &e| m | 1 << e))
    }

    pub fn path(&self) -> &[VertexId] {
        &self.path
    }

    pub fn path_edges(&self) -> &[EdgeId] {
        &self.path_edges
    }

    pub fn start(&self) -> VertexId {
        self.path[0]
    }

    pub fn end(&self) -> VertexId {
        *self.path.last().unwrap()
    }

    pub fn hit_ghost(&self) -> bool {
        self.hit_ghost
    }

    pub fn stop_set(&self) -> &[VertexId] {
        &self.stop
    }

    /// First path index whose vertex satisfies `pred`.
    pub fn first_index_where<P: Fn(VertexId) -> bool>(&self, pred: P) -> Option<usize> {
        self.path.iter().position(|&v| pred(v))
    }

    /// Turning direction at each interior visit of `v`: `(in, out)` lattice
    /// directions of travel. Visits that end at or leave through the ghost are
    /// skipped.
    pub fn turns_at(&self, g: &GhostGraph, v: VertexId) -> Vec<(Direction, Direction)> {
        let mut out = Vec::new();
        for j in 1..self.path.len().saturating_sub(1) {
            if self.path[j] != v {
                continue;
            }
            let (ein, eout) = (self.path_edges[j - 1], self.path_edges[j]);
            if let (Some(din), Some(dout)) = (g.direction_from(ein, self.path[j - 1]), g.direction_from(eout, v)) {
                out.push((din, dout));
            }
        }
        out
    }
}

/// Runs the exploration of `n` from `start` until the path reaches `stop`.
///
/// `stop` must contain the ghost and must not contain `start`. A vertex
/// outside `stop` without an unexplored odd edge means the current does not
/// have the required sources and is reported as an invariant violation.
pub fn explore_backbone(g: &GhostGraph, n: &Current, start: VertexId, stop: &[VertexId]) -> Result<BackboneTrace> {
    if n.len() != g.num_edges() {
        return Err(Error::Parameter(format!("current has {} edges, graph has {}", n.len(), g.num_edges())));
    }
    if start >= g.num_vertices() || g.is_ghost(start) {
        return Err(Error::Parameter(format!("bad start vertex {start}")));
    }
    let mut in_stop = vec![false; g.num_vertices()];
    for &v in stop {
        if v >= g.num_vertices() {
            return Err(Error::Parameter(format!("stop vertex {v} out of range")));
        }
        in_stop[v] = true;
    }
    if !in_stop[g.ghost()] {
        return Err(Error::Parameter("stop set must contain the ghost".into()));
    }
    if in_stop[start] {
        return Err(Error::Parameter(format!("start vertex {start} lies in the stop set")));
    }
    let stop_sorted: Vec<VertexId> = (0..g.num_vertices()).filter(|&v| in_stop[v]).collect();

    let mut in_explored = vec![false; g.num_edges()];
    let mut explored = Vec::new();
    let mut step_sizes = vec![0];
    let mut path = vec![start];
    let mut path_edges = Vec::new();
    let mut u = start;
    let mut incoming = None;
    while !in_stop[u] {
        let order = edge_order_at(g, u, incoming)?;
        let k = order
            .iter()
            .position(|&e| n.is_odd(e) && !in_explored[e])
            .ok_or_else(|| Error::Invariant { vertex: u, reason: "no unexplored odd edge".into() })?;
        for &e in &order[..=k] {
            if !in_explored[e] {
                in_explored[e] = true;
                explored.push(e);
            }
        }
        step_sizes.push(explored.len());
        let e = order[k];
        u = g.other_end(e, u);
        path.push(u);
        path_edges.push(e);
        incoming = Some(e);
    }
    Ok(BackboneTrace {
        explored,
        step_sizes,
        hit_ghost: u == g.ghost(),
        path,
        path_edges,
        stop: stop_sorted,
        in_explored,
    })
}
