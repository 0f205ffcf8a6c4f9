//! Quads: embedded planar graphs with four marked boundary arcs.
//!
//! Arcs are named after their end points, `(ab), (bc), (cd), (da)`, and are
//! listed counterclockwise around the outer face. Each arc is a vertex
//! sequence in counterclockwise order along the boundary.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{GhostGraph, Point, VertexId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArcName {
    Ab,
    Bc,
    Cd,
    Da,
}

impl ArcName {
    pub const ALL: [ArcName; 4] = [ArcName::Ab, ArcName::Bc, ArcName::Cd, ArcName::Da];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Next arc counterclockwise.
    pub fn next(self) -> ArcName {
        ArcName::ALL[(self.index() + 1) % 4]
    }

    pub fn opposite(self) -> ArcName {
        self.next().next()
    }

    pub fn as_str(self) -> &'static str {
        ["ab", "bc", "cd", "da"][self.index()]
    }

    pub fn parse(s: &str) -> Result<ArcName> {
        ArcName::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown arc name {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quad {
    positions: Vec<(f64, f64)>,
    edges: Vec<(VertexId, VertexId)>,
    arcs: [Vec<VertexId>; 4],
}

/// Faces of an embedded graph, as lists of directed edges `2e` (u→v) and
/// `2e+1` (v→u).
struct Faces {
    of_dart: Vec<usize>,
    darts: Vec<Vec<usize>>,
    outer: usize,
}

impl Quad {
    pub fn new(positions: Vec<(f64, f64)>, edges: Vec<(VertexId, VertexId)>, arcs: [Vec<VertexId>; 4]) -> Result<Self> {
        let n = positions.len();
        for &(u, v) in &edges {
            if u >= n || v >= n || u == v {
                return Err(Error::Structure(format!("bad edge ({u}, {v})")));
            }
        }
        for (name, arc) in ArcName::ALL.iter().zip(&arcs) {
            if arc.is_empty() {
                return Err(Error::Structure(format!("arc {} is empty", name.as_str())));
            }
            if let Some(&v) = arc.iter().find(|&&v| v >= n) {
                return Err(Error::Structure(format!("arc {} has unknown vertex {v}", name.as_str())));
            }
        }
        Ok(Self { positions, edges, arcs })
    }

    /// Grid of `w × h` vertices at integer positions, `(ab)` the left side,
    /// `(bc)` the bottom, `(cd)` the right side and `(da)` the top.
    pub fn grid(w: usize, h: usize) -> Result<Self> {
        if w < 2 || h < 2 {
            return Err(Error::Parameter(format!("grid quad needs at least 2×2 vertices, got {w}×{h}")));
        }
        let id = |x: usize, y: usize| x * h + y;
        let positions = (0..w).flat_map(|x| (0..h).map(move |y| (x as f64, y as f64))).collect();
        let mut edges = Vec::new();
        for x in 0..w {
            for y in 0..h {
                if x + 1 < w {
                    edges.push((id(x, y), id(x + 1, y)));
                }
                if y + 1 < h {
                    edges.push((id(x, y), id(x, y + 1)));
                }
            }
        }
        let arcs = [
            (0..h).rev().map(|y| id(0, y)).collect(),
            (0..w).map(|x| id(x, 0)).collect(),
            (0..h).map(|y| id(w - 1, y)).collect(),
            (0..w).rev().map(|x| id(x, h - 1)).collect(),
        ];
        Self::new(positions, edges, arcs)
    }

    /// The internal edges of a rectangular lattice graph, with arcs on the
    /// four sides as in [`Quad::grid`]. Vertex and edge identifiers agree
    /// with `g`.
    pub fn from_lattice(g: &GhostGraph) -> Result<Self> {
        let pts: Vec<Point> = (0..g.num_sites()).map(|v| g.point(v)).collect();
        let (x0, x1) = (pts.iter().map(|p| p.x).min().unwrap_or(0), pts.iter().map(|p| p.x).max().unwrap_or(0));
        let (y0, y1) = (pts.iter().map(|p| p.y).min().unwrap_or(0), pts.iter().map(|p| p.y).max().unwrap_or(0));
        let w = (x1 - x0 + 1) as usize;
        let h = (y1 - y0 + 1) as usize;
        if w * h != pts.len() || w * h < 2 {
            return Err(Error::Geometry("lattice quad needs a full rectangle of at least two vertices".into()));
        }
        let at = |x: i32, y: i32| g.vertex_at(Point::new(x, y)).unwrap();
        let a = g.spacing();
        let positions = pts.iter().map(|p| (p.x as f64 * a, p.y as f64 * a)).collect();
        let edges = (0..g.num_internal_edges()).map(|e| (g.edge(e).u, g.edge(e).v)).collect();
        let arcs = [
            (y0..=y1).rev().map(|y| at(x0, y)).collect(),
            (x0..=x1).map(|x| at(x, y0)).collect(),
            (y0..=y1).map(|y| at(x1, y)).collect(),
            (x0..=x1).rev().map(|x| at(x, y1)).collect(),
        ];
        Self::new(positions, edges, arcs)
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn arc(&self, name: ArcName) -> &[VertexId] {
        &self.arcs[name.index()]
    }

    pub fn arcs(&self) -> &[Vec<VertexId>; 4] {
        &self.arcs
    }

    /// Same graph without the listed edges.
    pub fn without_edges(&self, removed: &[usize]) -> Quad {
        let edges = self.edges.iter().enumerate().filter(|(e, _)| !removed.contains(e)).map(|(_, &uv)| uv).collect();
        Quad { positions: self.positions.clone(), edges, arcs: self.arcs.clone() }
    }

    /// Induced subquad on `keep` (a mask over vertices) with new arcs; vertex
    /// ids are preserved and dropped vertices become isolated.
    pub fn restricted(&self, keep: &[bool], arcs: [Vec<VertexId>; 4]) -> Result<Quad> {
        let edges = self.edges.iter().copied().filter(|&(u, v)| keep[u] && keep[v]).collect();
        Quad::new(self.positions.clone(), edges, arcs)
    }

    fn neighbours_ccw(&self) -> Result<Vec<Vec<usize>>> {
        let mut rot: Vec<Vec<(f64, usize)>> = vec![Vec::new(); self.num_vertices()];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let (pu, pv) = (self.positions[u], self.positions[v]);
            rot[u].push(((pv.1 - pu.1).atan2(pv.0 - pu.0), 2 * e));
            rot[v].push(((pu.1 - pv.1).atan2(pu.0 - pv.0), 2 * e + 1));
        }
        let mut out = Vec::with_capacity(rot.len());
        for (v, mut r) in rot.into_iter().enumerate() {
            r.sort_by(|a, b| a.0.total_cmp(&b.0));
            if r.windows(2).any(|w| (w[1].0 - w[0].0).abs() < 1e-12) || (r.len() > 1 && (r[0].0 + 2.0 * PI - r[r.len() - 1].0).abs() < 1e-12) {
                return Err(Error::Structure(format!("overlapping edges at vertex {v}")));
            }
            out.push(r.into_iter().map(|(_, d)| d).collect());
        }
        Ok(out)
    }

    fn dart_tail(&self, d: usize) -> VertexId {
        let (u, v) = self.edges[d / 2];
        if d % 2 == 0 {
            u
        } else {
            v
        }
    }

    fn dart_head(&self, d: usize) -> VertexId {
        self.dart_tail(d ^ 1)
    }

    fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        if n == 0 {
            return false;
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut q = VecDeque::from([0]);
        while let Some(u) = q.pop_front() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Traces the faces of the straight-line embedding and checks Euler's
    /// formula. Faces are traced with the face on the left, so bounded faces
    /// come out counterclockwise and the outer face has the least signed
    /// area.
    fn faces(&self) -> Result<Faces> {
        if !self.is_connected() || self.edges.is_empty() {
            return Err(Error::Structure("quad graph must be connected with at least one edge".into()));
        }
        let rot = self.neighbours_ccw()?;
        let mut pos_in_rot = vec![0usize; 2 * self.edges.len()];
        for r in &rot {
            for (i, &d) in r.iter().enumerate() {
                pos_in_rot[d] = i;
            }
        }
        let next = |d: usize| -> usize {
            let twin = d ^ 1;
            let v = self.dart_head(d);
            let r = &rot[v];
            r[(pos_in_rot[twin] + r.len() - 1) % r.len()]
        };
        let m = 2 * self.edges.len();
        let mut of_dart = vec![usize::MAX; m];
        let mut darts = Vec::new();
        for start in 0..m {
            if of_dart[start] != usize::MAX {
                continue;
            }
            let f = darts.len();
            let mut cycle = Vec::new();
            let mut d = start;
            while of_dart[d] == usize::MAX {
                of_dart[d] = f;
                cycle.push(d);
                d = next(d);
            }
            darts.push(cycle);
        }
        let euler = self.num_vertices() as i64 - self.edges.len() as i64 + darts.len() as i64;
        if euler != 2 {
            return Err(Error::Structure(format!("embedding is not planar (V − E + F = {euler})")));
        }
        let area = |cycle: &Vec<usize>| -> f64 {
            cycle
                .iter()
                .map(|&d| {
                    let (p, q) = (self.positions[self.dart_tail(d)], self.positions[self.dart_head(d)]);
                    p.0 * q.1 - q.0 * p.1
                })
                .sum::<f64>()
                / 2.0
        };
        let mut outer = 0;
        for f in 1..darts.len() {
            if area(&darts[f]) < area(&darts[outer]) - 1e-12 {
                outer = f;
            }
        }
        Ok(Faces { of_dart, darts, outer })
    }

    /// Checks that the embedding is planar and the arcs lie along the outer
    /// face in counterclockwise order.
    pub fn check_planar(&self) -> Result<()> {
        let faces = self.faces()?;
        self.outer_walk(&faces).map(|_| ())
    }

    /// Counterclockwise outer walk (interior on the left) as outer-face darts
    /// in walk order, each reversed, plus for every step the set of arcs it
    /// belongs to.
    fn outer_walk(&self, faces: &Faces) -> Result<(Vec<usize>, Vec<Vec<ArcName>>)> {
        let trace = &faces.darts[faces.outer];
        // The outer trace runs clockwise; walking it backwards gives the
        // counterclockwise walk. Step i goes corner[i] -> corner[i+1] and is
        // the twin of outer dart steps[i].
        let steps: Vec<usize> = trace.iter().rev().copied().collect();
        let k = steps.len();
        let corner = |i: usize| self.dart_head(steps[i % k]);
        let starts: Vec<usize> = (0..k).filter(|&i| corner(i) == self.arcs[0][0]).collect();
        'start: for s in starts {
            let mut spans = [(0usize, 0usize); 4];
            let mut pos = s;
            for (ai, arc) in self.arcs.iter().enumerate() {
                let mut first = None;
                for (j, &v) in arc.iter().enumerate() {
                    let from = if j == 0 { pos } else { pos + 1 };
                    match (from..=s + k).find(|&i| corner(i) == v) {
                        Some(i) => {
                            pos = i;
                            first.get_or_insert(i);
                        }
                        None => continue 'start,
                    }
                }
                spans[ai] = (first.unwrap(), pos);
            }
            let mut member = vec![Vec::new(); k];
            for (i, m) in member.iter_mut().enumerate() {
                let j = s + i;
                for (ai, &(a, b)) in spans.iter().enumerate() {
                    if a <= j && j < b {
                        m.push(ArcName::ALL[ai]);
                    }
                }
                if m.is_empty() {
                    let before = (0..4).filter(|&ai| spans[ai].1 <= j).last().unwrap_or(3);
                    m.push(ArcName::ALL[before]);
                    m.push(ArcName::ALL[(before + 1) % 4]);
                }
            }
            // An arc reduced to a single corner owns the two steps at it.
            for (ai, &(a, b)) in spans.iter().enumerate() {
                if a == b {
                    for j in [a + k - 1, a] {
                        let m = &mut member[(j - s) % k];
                        if !m.contains(&ArcName::ALL[ai]) {
                            m.push(ArcName::ALL[ai]);
                        }
                    }
                }
            }
            return Ok(((0..k).map(|i| steps[(s + i) % k]).collect(), member));
        }
        Err(Error::Structure("arcs do not lie along the outer face in counterclockwise order".into()))
    }

    /// Planar dual with arcs rotated by one position: the dual arc `(ab)`
    /// collects the outer-face sides of the primal `(bc)` steps, and so on.
    ///
    /// Bounded faces become vertices at their corner centroid. Each side of a
    /// primal edge facing the outer region becomes its own leaf vertex just
    /// outside that edge, so a primal arc that is shorted corresponds to
    /// dead-end leaves in the dual. Steps between two arcs belong to both.
    pub fn dual(&self) -> Result<Quad> {
        let faces = self.faces()?;
        let (walk, member) = self.outer_walk(&faces)?;
        let mut positions: Vec<(f64, f64)> = Vec::new();
        let mut face_node = vec![usize::MAX; faces.darts.len()];
        for (f, cycle) in faces.darts.iter().enumerate() {
            if f == faces.outer {
                continue;
            }
            let (sx, sy) = cycle.iter().fold((0.0, 0.0), |(sx, sy), &d| {
                let p = self.positions[self.dart_tail(d)];
                (sx + p.0, sy + p.1)
            });
            face_node[f] = positions.len();
            positions.push((sx / cycle.len() as f64, sy / cycle.len() as f64));
        }
        let mut leaf_of_dart = vec![usize::MAX; 2 * self.edges.len()];
        let mut arcs: [Vec<VertexId>; 4] = Default::default();
        for (i, &d) in walk.iter().enumerate() {
            // `d` is the outer-face dart; the walk step runs along its twin.
            let (p, q) = (self.positions[self.dart_head(d)], self.positions[self.dart_tail(d)]);
            let (dx, dy) = (q.0 - p.0, q.1 - p.1);
            let off = 0.25;
            leaf_of_dart[d] = positions.len();
            positions.push(((p.0 + q.0) / 2.0 + off * dy, (p.1 + q.1) / 2.0 - off * dx));
            for &a in &member[i] {
                let dual_arc = ArcName::ALL[(a.index() + 3) % 4];
                arcs[dual_arc.index()].push(leaf_of_dart[d]);
            }
        }
        let node = |d: usize| -> usize {
            let f = faces.of_dart[d];
            if f == faces.outer {
                leaf_of_dart[d]
            } else {
                face_node[f]
            }
        };
        let mut edges = Vec::new();
        for e in 0..self.edges.len() {
            let (x, y) = (node(2 * e), node(2 * e + 1));
            if x != y {
                edges.push((x, y));
            }
        }
        Quad::new(positions, edges, arcs)
    }

    /// Text form: `v x y` per vertex, `e u v` per edge, `arc NAME v…` per arc.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for &(x, y) in &self.positions {
            let _ = writeln!(s, "v {x} {y}");
        }
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "e {u} {v}");
        }
        for name in ArcName::ALL {
            let vs: Vec<String> = self.arc(name).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "arc {} {}", name.as_str(), vs.join(" "));
        }
        s
    }

    /// Parses [`Quad::to_text`] output. Blank lines and `#` comments are
    /// ignored.
    pub fn parse(text: &str) -> Result<Quad> {
        let mut positions = Vec::new();
        let mut edges = Vec::new();
        let mut arcs: [Option<Vec<VertexId>>; 4] = Default::default();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Parameter(format!("quad text line {}: {line:?}", ln + 1));
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let x: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    let y: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    positions.push((x, y));
                }
                Some("e") => {
                    let u: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    let v: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    edges.push((u, v));
                }
                Some("arc") => {
                    let name = ArcName::parse(it.next().ok_or_else(bad)?)?;
                    let vs = it.by_ref().map(|t| t.parse::<usize>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
                    arcs[name.index()] = Some(vs);
                }
                _ => return Err(bad()),
            }
            if it.next().is_some() {
                return Err(bad());
            }
        }
        let arcs = arcs.map(|a| a.unwrap_or_default());
        Quad::new(positions, edges, arcs)
    }
}
