//! Worm sampler for sourced currents.
//!
//! The chain lives on odd sets `O` with `∂O = A △ {head, tail}`, weighted by
//! `Π_O tanh K_e`. The head moves along a uniformly chosen active edge,
//! toggling it, with a Metropolis correction for the degree. When head and
//! tail meet, the configuration is a sample of the odd set under `P^A`;
//! even-positive labels are then drawn independently.

use std::collections::VecDeque;

use rand::Rng;

use super::{Class, Current, CurrentMeasureSpec};
use crate::error::{Error, Result};
use crate::lattice::{EdgeId, VertexId};
use crate::rng::{chain_rng, ChainRng};

#[derive(Clone, Debug)]
pub struct WormChain {
    ends: Vec<(VertexId, VertexId)>,
    tanh: Vec<f64>,
    even_prob: Vec<f64>,
    adj: Vec<Vec<EdgeId>>,
    movable: Vec<VertexId>,
    odd: Vec<bool>,
    head: VertexId,
    tail: VertexId,
    num_active: usize,
    rng: ChainRng,
}

impl WormChain {
    pub fn new(spec: &CurrentMeasureSpec, seed: u64, chain: u64) -> Result<Self> {
        let bad = spec.unrealizable_components();
        if !bad.is_empty() {
            return Err(Error::Unrealizable(bad));
        }
        let c = spec.couplings();
        let n = c.num_vertices();
        let ends = c.all_ends().to_vec();
        let mut adj = vec![Vec::new(); n];
        for e in c.active_edges() {
            let (u, v) = ends[e];
            adj[u].push(e);
            adj[v].push(e);
        }
        let movable: Vec<VertexId> = (0..n).filter(|&v| !adj[v].is_empty()).collect();
        let odd = initial_odd_set(n, &ends, &adj, spec.sources());
        let tanh = c.couplings().iter().map(|k| k.tanh()).collect();
        let even_prob = c.couplings().iter().map(|k| 1.0 - 1.0 / k.cosh()).collect();
        let start = movable.first().copied().unwrap_or(0);
        Ok(Self {
            ends,
            tanh,
            even_prob,
            num_active: c.active_edges().len(),
            adj,
            movable,
            odd,
            head: start,
            tail: start,
            rng: chain_rng(seed, chain),
        })
    }

    pub fn is_closed(&self) -> bool {
        self.head == self.tail
    }

    /// One Metropolis step of the head, or a relocation of the closed worm.
    pub fn step(&mut self) {
        if self.movable.is_empty() {
            return;
        }
        // The move type is chosen independently of the state so that
        // proposals stay symmetric; relocation is a no-op on an open worm.
        if self.rng.gen::<bool>() {
            if self.head != self.tail {
                return;
            }
            let v = self.movable[self.rng.gen_range(0..self.movable.len())];
            self.head = v;
            self.tail = v;
            return;
        }
        let h = self.head;
        let deg = self.adj[h].len();
        let e = self.adj[h][self.rng.gen_range(0..deg)];
        let (u, v) = self.ends[e];
        let next = if u == h { v } else { u };
        let ratio = if self.odd[e] { 1.0 / self.tanh[e] } else { self.tanh[e] };
        let accept = ratio * deg as f64 / self.adj[next].len() as f64;
        if accept >= 1.0 || self.rng.gen::<f64>() < accept {
            self.odd[e] = !self.odd[e];
            self.head = next;
        }
    }

    /// Advances until the worm has been closed at `num_active` time steps.
    ///
    /// Closed time steps form a Markov chain of their own whose stationary
    /// law is the sourced measure; stopping at the first closure after a
    /// fixed number of steps instead would weight states by the length of
    /// the excursion preceding them.
    pub fn sweep(&mut self) {
        let mut closed = 0;
        while closed < self.num_active.max(1) {
            self.step();
            if self.is_closed() {
                closed += 1;
            }
        }
    }

    /// Odd set of the current (closed) state.
    pub fn odd(&self) -> &[bool] {
        &self.odd
    }

    /// Runs `sweeps` sweeps and returns a class configuration.
    pub fn sample(&mut self, sweeps: usize) -> Current {
        for _ in 0..sweeps.max(1) {
            self.sweep();
        }
        self.current()
    }

    /// Class labels for the present odd set with fresh even labels.
    pub fn current(&mut self) -> Current {
        let labels = (0..self.odd.len())
            .map(|e| {
                if self.odd[e] {
                    Class::Odd
                } else if self.even_prob[e] > 0.0 && self.rng.gen::<f64>() < self.even_prob[e] {
                    Class::EvenPositive
                } else {
                    Class::Zero
                }
            })
            .collect();
        Current::from_labels(labels)
    }
}

/// An odd set with the prescribed sources: sources are paired within each
/// component and joined along breadth-first-tree paths.
fn initial_odd_set(n: usize, ends: &[(VertexId, VertexId)], adj: &[Vec<EdgeId>], sources: &[VertexId]) -> Vec<bool> {
    let mut odd = vec![false; ends.len()];
    let mut parent: Vec<Option<EdgeId>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut is_source = vec![false; n];
    for &s in sources {
        is_source[s] = true;
    }
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut order = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &e in &adj[u] {
                let (a, b) = ends[e];
                let w = if a == u { b } else { a };
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(e);
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        // Leaves first: push each odd excess towards the root.
        let mut excess: Vec<bool> = vec![false; n];
        for &v in &order {
            excess[v] = is_source[v];
        }
        for &v in order.iter().rev() {
            if let Some(e) = parent[v] {
                if excess[v] {
                    odd[e] = true;
                    let (a, b) = ends[e];
                    let p = if a == v { b } else { a };
                    excess[p] = !excess[p];
                }
            }
        }
    }
    odd
}

/// One sample after `sweeps` sweeps of a fresh chain.
pub fn worm_sample(spec: &CurrentMeasureSpec, seed: u64, sweeps: usize) -> Result<Current> {
    if sweeps == 0 {
        return Err(Error::Parameter("sweeps must be >= 1".into()));
    }
    let mut chain = WormChain::new(spec, seed, 0)?;
    Ok(chain.sample(sweeps))
}
