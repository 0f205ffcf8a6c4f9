//! Finite subgraphs of the rescaled square lattice `aZ²` augmented with a
//! ghost vertex.
//!
//! Vertices are stored as integer lattice coordinates; the spacing `a` only
//! enters through region predicates (which work in unscaled Euclidean units)
//! and through the field weights. Boxes follow the convention
//! `Λ_k(x) = x + [-k/2, k/2]²`, i.e. `k` is the side length in unscaled units.

pub mod quad;

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};

pub use quad::{ArcName, Quad};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Slack used by every geometric predicate.
pub const GEOM_EPS: f64 = 1e-9;

/// Default cap on the number of non-ghost vertices of a constructed graph.
pub const DEFAULT_VERTEX_BUDGET: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn step(self, d: Direction) -> Point {
        let (dx, dy) = d.offset();
        Point::new(self.x + dx, self.y + dy)
    }
}

/// Lattice directions in the standard orientation (y up).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    East,
    North,
    West,
    South,
}

impl Direction {
    /// Fixed order used at the start vertex of an exploration.
    pub const ALL: [Direction; 4] = [Direction::East, Direction::North, Direction::West, Direction::South];

    pub fn offset(self) -> (i32, i32) {
        match self {
            Direction::East => (1, 0),
            Direction::North => (0, 1),
            Direction::West => (-1, 0),
            Direction::South => (0, -1),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Direction::East => 0,
            Direction::North => 1,
            Direction::West => 2,
            Direction::South => 3,
        }
    }

    /// Right turn: clockwise rotation by 90°.
    pub fn clockwise(self) -> Direction {
        match self {
            Direction::East => Direction::South,
            Direction::South => Direction::West,
            Direction::West => Direction::North,
            Direction::North => Direction::East,
        }
    }

    /// Left turn.
    pub fn counterclockwise(self) -> Direction {
        self.clockwise().opposite()
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::East => Direction::West,
            Direction::West => Direction::East,
            Direction::North => Direction::South,
            Direction::South => Direction::North,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Internal(Axis),
    Ghost,
}

/// An edge of the ghost-augmented graph. Internal edges have `u` as the
/// lexicographically lesser endpoint; ghost edges have `v == ghost`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn is_ghost(&self) -> bool {
        self.kind == EdgeKind::Ghost
    }

    pub fn other(&self, w: VertexId) -> VertexId {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Geometric regions in unscaled units. Membership of a lattice point only
/// depends on its Euclidean position `a·p`.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// `center + [-side/2, side/2]²`.
    Box { center: (f64, f64), side: f64 },
    /// `Λ_outer(center) \ Λ_inner(center)`.
    Annulus { center: (f64, f64), inner: f64, outer: f64 },
    /// Explicit set of lattice points.
    Vertices(BTreeSet<Point>),
}

impl Region {
    pub fn square(center: (f64, f64), side: f64) -> Region {
        Region::Box { center, side }
    }

    fn in_box(center: (f64, f64), side: f64, a: f64, p: Point) -> bool {
        let half = side / 2.0 + GEOM_EPS;
        (p.x as f64 * a - center.0).abs() <= half && (p.y as f64 * a - center.1).abs() <= half
    }

    pub fn contains(&self, a: f64, p: Point) -> bool {
        match self {
            Region::Box { center, side } => Self::in_box(*center, *side, a, p),
            Region::Annulus { center, inner, outer } => {
                Self::in_box(*center, *outer, a, p) && !Self::in_box(*center, *inner, a, p)
            }
            Region::Vertices(set) => set.contains(&p),
        }
    }

    /// Lattice points of the region in lexicographic `(x, y)` order.
    pub fn lattice_points(&self, a: f64, budget: usize) -> Result<Vec<Point>> {
        check_spacing(a)?;
        let (center, half) = match self {
            Region::Vertices(set) => {
                if set.len() > budget {
                    return Err(Error::Size { what: "region vertices", needed: set.len(), budget });
                }
                return Ok(set.iter().copied().collect());
            }
            Region::Box { center, side } => (*center, side / 2.0),
            Region::Annulus { center, outer, .. } => (*center, outer / 2.0),
        };
        if half < 0.0 {
            return Err(Error::Parameter(format!("negative box size {}", 2.0 * half)));
        }
        let lo_x = ((center.0 - half) / a - GEOM_EPS).ceil() as i64;
        let hi_x = ((center.0 + half) / a + GEOM_EPS).floor() as i64;
        let lo_y = ((center.1 - half) / a - GEOM_EPS).ceil() as i64;
        let hi_y = ((center.1 + half) / a + GEOM_EPS).floor() as i64;
        let nx = (hi_x - lo_x + 1).max(0) as u128;
        let ny = (hi_y - lo_y + 1).max(0) as u128;
        if nx * ny > budget as u128 {
            return Err(Error::Size { what: "region vertices", needed: (nx * ny).min(usize::MAX as u128) as usize, budget });
        }
        let mut out = Vec::new();
        for x in lo_x..=hi_x {
            for y in lo_y..=hi_y {
                let p = Point::new(x as i32, y as i32);
                if self.contains(a, p) {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }
}

fn check_spacing(a: f64) -> Result<()> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Parameter(format!("spacing a must lie in (0, 1], got {a}")));
    }
    Ok(())
}

/// Annulus `A_{n,m}(center) = Λ_m(center) \ Λ_n(center)`.
///
/// Equal radii give the empty region; `n > m` is rejected.
pub fn build_annulus(n: f64, m: f64, center: (f64, f64), a: f64) -> Result<Region> {
    check_spacing(a)?;
    if !(n > 0.0) || n > m {
        return Err(Error::Parameter(format!("annulus needs 0 < n <= m, got n={n}, m={m}")));
    }
    Ok(Region::Annulus { center, inner: n, outer: m })
}

/// Finite subgraph of `aZ²` with Griffiths' ghost vertex. Immutable after
/// construction.
#[derive(Clone, Debug)]
pub struct GhostGraph {
    spacing: f64,
    points: Vec<Point>,
    index: HashMap<Point, VertexId>,
    edges: Vec<Edge>,
    num_internal: usize,
    lattice_nbr: Vec<[Option<EdgeId>; 4]>,
    incident: Vec<Vec<EdgeId>>,
}

impl GhostGraph {
    /// Induced subgraph on the given lattice points (duplicates ignored).
    pub fn from_points<I: IntoIterator<Item = Point>>(a: f64, points: I) -> Result<Self> {
        check_spacing(a)?;
        let set: BTreeSet<Point> = points.into_iter().collect();
        let points: Vec<Point> = set.into_iter().collect();
        let n = points.len();
        let ghost = n;
        let index: HashMap<Point, VertexId> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();

        let mut edges = Vec::with_capacity(3 * n);
        let mut lattice_nbr = vec![[None; 4]; n];
        for (i, &p) in points.iter().enumerate() {
            for (axis, dir) in [(Axis::X, Direction::East), (Axis::Y, Direction::North)] {
                if let Some(&j) = index.get(&p.step(dir)) {
                    let e = edges.len();
                    edges.push(Edge { u: i, v: j, kind: EdgeKind::Internal(axis) });
                    lattice_nbr[i][dir.index()] = Some(e);
                    lattice_nbr[j][dir.opposite().index()] = Some(e);
                }
            }
        }
        let num_internal = edges.len();
        for i in 0..n {
            edges.push(Edge { u: i, v: ghost, kind: EdgeKind::Ghost });
        }
        let mut incident = vec![Vec::new(); n + 1];
        for (e, edge) in edges.iter().enumerate() {
            incident[edge.u].push(e);
            incident[edge.v].push(e);
        }
        Ok(Self { spacing: a, points, index, edges, num_internal, lattice_nbr, incident })
    }

    pub fn from_region(a: f64, region: &Region, budget: usize) -> Result<Self> {
        let pts = region.lattice_points(a, budget)?;
        Self::from_points(a, pts)
    }

    /// The box `Λ_k(center)` with ghost.
    pub fn build_box(a: f64, k: f64, center: (f64, f64)) -> Result<Self> {
        check_spacing(a)?;
        if !(k >= 0.0) {
            return Err(Error::Parameter(format!("box side must be >= 0, got {k}")));
        }
        Self::from_region(a, &Region::square(center, k), DEFAULT_VERTEX_BUDGET)
    }

    /// Axis-aligned `width × height` block of lattice points with lower-left
    /// corner at the origin (`width` points per row).
    pub fn rectangle(a: f64, width: usize, height: usize) -> Result<Self> {
        let pts = (0..width as i32).flat_map(|x| (0..height as i32).map(move |y| Point::new(x, y)));
        Self::from_points(a, pts)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of lattice (non-ghost) vertices.
    pub fn num_sites(&self) -> usize {
        self.points.len()
    }

    /// Number of vertices including the ghost.
    pub fn num_vertices(&self) -> usize {
        self.points.len() + 1
    }

    pub fn ghost(&self) -> VertexId {
        self.points.len()
    }

    pub fn is_ghost(&self, v: VertexId) -> bool {
        v == self.ghost()
    }

    pub fn point(&self, v: VertexId) -> Point {
        self.points[v]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Euclidean position in unscaled units.
    pub fn position(&self, v: VertexId) -> (f64, f64) {
        let p = self.points[v];
        (p.x as f64 * self.spacing, p.y as f64 * self.spacing)
    }

    pub fn vertex_at(&self, p: Point) -> Option<VertexId> {
        self.index.get(&p).copied()
    }

    /// The lattice vertex nearest to an unscaled position, if present.
    pub fn vertex_near(&self, pos: (f64, f64)) -> Option<VertexId> {
        let p = Point::new((pos.0 / self.spacing).round() as i32, (pos.1 / self.spacing).round() as i32);
        self.vertex_at(p)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_internal_edges(&self) -> usize {
        self.num_internal
    }

    pub fn is_ghost_edge(&self, e: EdgeId) -> bool {
        e >= self.num_internal
    }

    pub fn ghost_edge(&self, v: VertexId) -> EdgeId {
        debug_assert!(v < self.num_sites());
        self.num_internal + v
    }

    /// Internal edge leaving `v` in direction `d`, if present.
    pub fn lattice_edge(&self, v: VertexId, d: Direction) -> Option<EdgeId> {
        self.lattice_nbr[v][d.index()]
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incident[v].len()
    }

    pub fn other_end(&self, e: EdgeId, v: VertexId) -> VertexId {
        self.edges[e].other(v)
    }

    /// Direction of travel along internal edge `e` when leaving `from`.
    pub fn direction_from(&self, e: EdgeId, from: VertexId) -> Option<Direction> {
        let edge = self.edges[e];
        if edge.is_ghost() {
            return None;
        }
        let to = edge.other(from);
        let (p, q) = (self.points[from], self.points[to]);
        Direction::ALL.into_iter().find(|d| p.step(*d) == q)
    }

    /// Lattice vertices inside the region.
    pub fn vertices_in(&self, region: &Region) -> Vec<VertexId> {
        (0..self.num_sites()).filter(|&v| region.contains(self.spacing, self.points[v])).collect()
    }

    /// Vertices of the region with a lattice neighbour (in `Z²`, not only in
    /// the graph) outside the region: the inner vertex boundary.
    pub fn boundary_of(&self, region: &Region) -> Vec<VertexId> {
        let a = self.spacing;
        (0..self.num_sites())
            .filter(|&v| {
                let p = self.points[v];
                region.contains(a, p) && Direction::ALL.iter().any(|d| !region.contains(a, p.step(*d)))
            })
            .collect()
    }

    /// Vertices with fewer than four lattice neighbours in the graph.
    pub fn outer_boundary(&self) -> Vec<VertexId> {
        (0..self.num_sites()).filter(|&v| self.lattice_nbr[v].iter().any(|e| e.is_none())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_box_is_single_vertex() {
        let g = GhostGraph::build_box(1.0, 0.0, (0.0, 0.0)).unwrap();
        assert_eq!(g.num_sites(), 1);
        assert_eq!(g.num_internal_edges(), 0);
        assert_eq!(g.num_edges() - g.num_internal_edges(), 1);
    }

    #[test]
    fn three_by_three_box_counts() {
        let g = GhostGraph::build_box(1.0, 2.0, (0.0, 0.0)).unwrap();
        assert_eq!(g.num_sites(), 9);
        assert_eq!(g.num_internal_edges(), 12);
        assert_eq!(g.num_edges() - g.num_internal_edges(), 9);
    }

    #[test]
    fn membership_is_geometric() {
        let g = GhostGraph::build_box(0.5, 1.0, (0.0, 0.0)).unwrap();
        assert_eq!(g.num_sites(), 9);
        let coarse = GhostGraph::build_box(1.0, 2.0, (0.0, 0.0)).unwrap();
        let scaled: Vec<(f64, f64)> = coarse.points().iter().map(|p| (p.x as f64, p.y as f64)).collect();
        let fine: Vec<(f64, f64)> = g.points().iter().map(|p| (p.x as f64 * 2.0 * 0.5, p.y as f64 * 2.0 * 0.5)).collect();
        assert_eq!(scaled, fine);
    }

    #[test]
    fn box_vertex_count_matches_side_formula() {
        for (a, k) in [(1.0, 4.0), (0.5, 3.0), (0.25, 2.0), (0.125, 1.0)] {
            let g = GhostGraph::build_box(a, k, (0.0, 0.0)).unwrap();
            let per_side = (k / a + GEOM_EPS).floor() as usize + 1;
            assert_eq!(g.num_sites(), per_side * per_side, "a={a} k={k}");
        }
    }

    #[test]
    fn bad_spacing_and_budget_are_rejected() {
        assert!(matches!(GhostGraph::build_box(0.0, 1.0, (0.0, 0.0)), Err(Error::Parameter(_))));
        assert!(matches!(GhostGraph::build_box(-0.5, 1.0, (0.0, 0.0)), Err(Error::Parameter(_))));
        let r = Region::square((0.0, 0.0), 10.0);
        assert!(matches!(GhostGraph::from_region(0.001, &r, 1000), Err(Error::Size { .. })));
    }

    #[test]
    fn ghost_edges_one_per_site_and_degrees() {
        let g = GhostGraph::build_box(1.0, 4.0, (0.0, 0.0)).unwrap();
        let ghost = g.ghost();
        for v in 0..g.num_sites() {
            let ghost_edges = g.incident(v).iter().filter(|&&e| g.edge(e).is_ghost()).count();
            assert_eq!(ghost_edges, 1);
            assert_eq!(g.other_end(g.ghost_edge(v), v), ghost);
        }
        let center = g.vertex_at(Point::new(0, 0)).unwrap();
        assert_eq!(g.degree(center), 5);
        let corner = g.vertex_at(Point::new(2, 2)).unwrap();
        assert_eq!(g.degree(corner), 3);
        assert_eq!(g.degree(ghost), g.num_sites());
    }

    #[test]
    fn internal_edges_have_unit_lattice_length() {
        let g = GhostGraph::build_box(0.25, 2.0, (0.3, -0.2)).unwrap();
        for e in g.edges().iter().filter(|e| !e.is_ghost()) {
            let (p, q) = (g.position(e.u), g.position(e.v));
            let d = ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
            assert!((d - 0.25).abs() < 1e-12);
            assert!(g.point(e.u) < g.point(e.v));
        }
    }

    #[test]
    fn edge_ids_are_deterministic() {
        let g1 = GhostGraph::build_box(0.5, 3.0, (0.0, 0.0)).unwrap();
        let g2 = GhostGraph::build_box(0.5, 3.0, (0.0, 0.0)).unwrap();
        assert_eq!(g1.edges(), g2.edges());
    }

    #[test]
    fn annulus_membership() {
        let r = build_annulus(1.0, 1.0, (0.0, 0.0), 1.0).unwrap();
        assert!(r.lattice_points(1.0, 100).unwrap().is_empty());
        // Side-length convention: Λ_2 is 3×3 and Λ_1 the centre point.
        let r = build_annulus(1.0, 2.0, (0.0, 0.0), 1.0).unwrap();
        assert_eq!(r.lattice_points(1.0, 100).unwrap().len(), 8);
        assert!(!r.contains(1.0, Point::new(0, 0)));
        let r = build_annulus(2.0, 4.0, (0.0, 0.0), 1.0).unwrap();
        assert_eq!(r.lattice_points(1.0, 100).unwrap().len(), 25 - 9);
        assert!(matches!(build_annulus(2.0, 1.0, (0.0, 0.0), 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn turns_follow_standard_orientation() {
        assert_eq!(Direction::East.clockwise(), Direction::South);
        assert_eq!(Direction::East.counterclockwise(), Direction::North);
        assert_eq!(Direction::North.clockwise(), Direction::East);
    }

    #[test]
    fn boundary_of_box() {
        let g = GhostGraph::build_box(1.0, 4.0, (0.0, 0.0)).unwrap();
        let b = g.boundary_of(&Region::square((0.0, 0.0), 4.0));
        assert_eq!(b.len(), 16);
        assert_eq!(g.outer_boundary().len(), 16);
    }
}
