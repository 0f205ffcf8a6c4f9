//! Spin parameters and the edge-coupling view shared by every representation.
//!
//! All three representations (spins, currents, FK) only see a graph with a
//! coupling `K_e ≥ 0` per edge: `K_e = β` on internal edges and
//! `K_e = β h_x a^{15/8}` on the ghost edge of `x`.

use crate::error::{Error, Result};
use crate::lattice::{EdgeId, GhostGraph, VertexId};

/// Critical inverse temperature of the square lattice, `ln(1+√2)/2`.
pub fn beta_critical() -> f64 {
    (1.0 + 2f64.sqrt()).ln() / 2.0
}

/// Scaling dimension of the field: the lattice field is `h·a^{15/8}`.
pub const FIELD_EXPONENT: f64 = 15.0 / 8.0;

#[derive(Clone, Debug, PartialEq)]
pub enum FieldSchedule {
    Uniform(f64),
    /// Field `h` everywhere except within sup-distance `radius` (unscaled)
    /// of each listed point, where it is zero.
    ZeroedNear { h: f64, points: Vec<(f64, f64)>, radius: f64 },
    /// Explicit value per lattice vertex.
    PerVertex(Vec<f64>),
}

impl FieldSchedule {
    pub fn value_at(&self, g: &GhostGraph, v: VertexId) -> f64 {
        match self {
            FieldSchedule::Uniform(h) => *h,
            FieldSchedule::ZeroedNear { h, points, radius } => {
                let (x, y) = g.position(v);
                let near = points
                    .iter()
                    .any(|&(px, py)| (x - px).abs() <= radius + 1e-9 && (y - py).abs() <= radius + 1e-9);
                if near {
                    0.0
                } else {
                    *h
                }
            }
            FieldSchedule::PerVertex(hs) => hs[v],
        }
    }

    pub fn max_field(&self) -> f64 {
        match self {
            FieldSchedule::Uniform(h) | FieldSchedule::ZeroedNear { h, .. } => *h,
            FieldSchedule::PerVertex(hs) => hs.iter().cloned().fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinParams {
    pub beta: f64,
    pub field: FieldSchedule,
}

impl Default for SpinParams {
    fn default() -> Self {
        Self { beta: beta_critical(), field: FieldSchedule::Uniform(0.0) }
    }
}

impl SpinParams {
    pub fn critical(h: f64) -> Self {
        Self { beta: beta_critical(), field: FieldSchedule::Uniform(h) }
    }

    pub fn with_beta(beta: f64, h: f64) -> Self {
        Self { beta, field: FieldSchedule::Uniform(h) }
    }

    pub fn validate(&self, g: &GhostGraph) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Parameter(format!("beta must be > 0, got {}", self.beta)));
        }
        if let FieldSchedule::PerVertex(hs) = &self.field {
            if hs.len() != g.num_sites() {
                return Err(Error::Parameter(format!(
                    "field schedule has {} entries for {} vertices",
                    hs.len(),
                    g.num_sites()
                )));
            }
        }
        for v in 0..g.num_sites() {
            let h = self.field.value_at(g, v);
            if !(h >= 0.0 && h.is_finite()) {
                return Err(Error::Parameter(format!("field must be >= 0, got {h} at vertex {v}")));
            }
        }
        Ok(())
    }
}

/// A finite multigraph with one nonnegative coupling per edge and an optional
/// distinguished ghost vertex (whose spin is pinned to +1).
#[derive(Clone, Debug, PartialEq)]
pub struct Couplings {
    num_vertices: usize,
    ghost: Option<VertexId>,
    ends: Vec<(VertexId, VertexId)>,
    coupling: Vec<f64>,
}

impl Couplings {
    pub fn new(
        num_vertices: usize,
        ghost: Option<VertexId>,
        ends: Vec<(VertexId, VertexId)>,
        coupling: Vec<f64>,
    ) -> Result<Self> {
        if ends.len() != coupling.len() {
            return Err(Error::Parameter("one coupling per edge required".into()));
        }
        if let Some(gv) = ghost {
            if gv >= num_vertices {
                return Err(Error::Parameter(format!("ghost {gv} out of range")));
            }
        }
        for (&(u, v), &k) in ends.iter().zip(&coupling) {
            if u >= num_vertices || v >= num_vertices || u == v {
                return Err(Error::Parameter(format!("bad edge ({u}, {v})")));
            }
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::Parameter(format!("coupling must be finite and >= 0, got {k}")));
            }
        }
        Ok(Self { num_vertices, ghost, ends, coupling })
    }

    /// Couplings of a lattice graph: `β` internal, `β h_x a^{15/8}` ghost.
    pub fn from_lattice(g: &GhostGraph, p: &SpinParams) -> Result<Self> {
        p.validate(g)?;
        let scale = g.spacing().powf(FIELD_EXPONENT);
        let ends = g.edges().iter().map(|e| (e.u, e.v)).collect();
        let coupling = g
            .edges()
            .iter()
            .map(|e| if e.is_ghost() { p.beta * p.field.value_at(g, e.u) * scale } else { p.beta })
            .collect();
        Self::new(g.num_vertices(), Some(g.ghost()), ends, coupling)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.ends.len()
    }

    pub fn ghost(&self) -> Option<VertexId> {
        self.ghost
    }

    /// Number of vertices carrying a free spin.
    pub fn num_spins(&self) -> usize {
        self.num_vertices - usize::from(self.ghost.is_some())
    }

    pub fn ends(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.ends[e]
    }

    pub fn all_ends(&self) -> &[(VertexId, VertexId)] {
        &self.ends
    }

    pub fn coupling(&self, e: EdgeId) -> f64 {
        self.coupling[e]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.coupling
    }

    /// Edges with strictly positive coupling.
    pub fn active_edges(&self) -> Vec<EdgeId> {
        (0..self.ends.len()).filter(|&e| self.coupling[e] > 0.0).collect()
    }

    /// Same graph with the listed edges removed (coupling set to zero).
    pub fn without_edges(&self, removed: &[EdgeId]) -> Self {
        let mut c = self.clone();
        for &e in removed {
            c.coupling[e] = 0.0;
        }
        c
    }

    pub fn with_coupling(&self, e: EdgeId, k: f64) -> Self {
        let mut c = self.clone();
        c.coupling[e] = k;
        c
    }

    /// Connected components of the active-edge graph, as a label per vertex.
    pub fn active_components(&self) -> Vec<usize> {
        let mut uf = crate::unionfind::UnionFind::new(self.num_vertices);
        for (e, &(u, v)) in self.ends.iter().enumerate() {
            if self.coupling[e] > 0.0 {
                uf.union(u, v);
            }
        }
        (0..self.num_vertices).map(|v| uf.find(v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_beta_value() {
        assert!((beta_critical() - 0.440_686_793_509_771_5).abs() < 1e-15);
    }

    #[test]
    fn lattice_couplings_scale_field() {
        let g = GhostGraph::build_box(0.5, 1.0, (0.0, 0.0)).unwrap();
        let c = Couplings::from_lattice(&g, &SpinParams::with_beta(0.4, 2.0)).unwrap();
        let expect = 0.4 * 2.0 * 0.5f64.powf(15.0 / 8.0);
        for e in 0..g.num_edges() {
            if g.is_ghost_edge(e) {
                assert!((c.coupling(e) - expect).abs() < 1e-15);
            } else {
                assert_eq!(c.coupling(e), 0.4);
            }
        }
    }

    #[test]
    fn zeroed_field_keeps_ghost_edges() {
        let g = GhostGraph::build_box(1.0, 4.0, (0.0, 0.0)).unwrap();
        let p = SpinParams {
            beta: beta_critical(),
            field: FieldSchedule::ZeroedNear { h: 0.3, points: vec![(0.0, 0.0)], radius: 1.0 },
        };
        let c = Couplings::from_lattice(&g, &p).unwrap();
        assert_eq!(c.num_edges(), g.num_edges());
        let zeroed = (0..g.num_sites()).filter(|&v| c.coupling(g.ghost_edge(v)) == 0.0).count();
        assert_eq!(zeroed, 9);
    }

    #[test]
    fn rejects_negative_field() {
        let g = GhostGraph::build_box(1.0, 1.0, (0.0, 0.0)).unwrap();
        assert!(Couplings::from_lattice(&g, &SpinParams::with_beta(0.4, -1.0)).is_err());
        assert!(Couplings::from_lattice(&g, &SpinParams::with_beta(0.0, 1.0)).is_err());
    }
}
