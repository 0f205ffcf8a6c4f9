//! Explored domains `D_i` and `T_i` around the point where the backbone first
//! reaches an annulus.

use std::collections::VecDeque;

use super::BackboneTrace;
use crate::error::{Error, Result};
use crate::lattice::{Direction, EdgeId, GhostGraph, Point, VertexId, GEOM_EPS};

#[derive(Clone, Debug, PartialEq)]
pub struct ExploredDomain {
    /// Least and greatest explored points of `∂Λ_1(x_i)` in the boundary order.
    pub d: VertexId,
    pub d_prime: VertexId,
    /// Removed boundary points, including `d` and `d'`.
    pub omega_tilde: Vec<VertexId>,
    /// `D_i`, sorted.
    pub domain: Vec<VertexId>,
    /// `T_i`, sorted.
    pub t_domain: Vec<VertexId>,
    /// `∂Λ_2(x_i) \ T_i`, sorted.
    pub a_set: Vec<VertexId>,
}

/// Side of the annulus `x` lies on, seen from `center`: the outward normal.
fn outward(g: &GhostGraph, x: VertexId, center: (f64, f64)) -> Direction {
    let (px, py) = g.position(x);
    let (dx, dy) = (px - center.0, py - center.1);
    if dx.abs() + GEOM_EPS >= dy.abs() {
        if dx >= 0.0 {
            Direction::East
        } else {
            Direction::West
        }
    } else if dy > 0.0 {
        Direction::North
    } else {
        Direction::South
    }
}

/// Points of the square ring of lattice radius `r` around `p`, starting at
/// the point in direction `out` and walking clockwise.
fn ring_points(p: Point, r: i32, out: Direction) -> Vec<Point> {
    if r == 0 {
        return vec![p];
    }
    let (ox, oy) = out.offset();
    let mut q = Point::new(p.x + r * ox, p.y + r * oy);
    let mut dir = out.clockwise();
    let mut pts = vec![q];
    for (k, len) in [r, 2 * r, 2 * r, 2 * r, r - 1].into_iter().enumerate() {
        if k > 0 {
            dir = dir.clockwise();
        }
        for _ in 0..len {
            q = q.step(dir);
            pts.push(q);
        }
    }
    pts
}

fn lattice_radius(g: &GhostGraph, side: f64) -> i32 {
    (side / 2.0 / g.spacing() + GEOM_EPS).floor() as i32
}

/// Graph vertices of `∂Λ_side(x)` in the boundary order used for `d, d'`:
/// starting from the point on the outward side (relative to the annulus
/// centre) and walking clockwise.
pub fn boundary_ring(g: &GhostGraph, x: VertexId, side: f64, center: (f64, f64)) -> Result<Vec<VertexId>> {
    let r = lattice_radius(g, side);
    if r < 1 {
        return Err(Error::Geometry(format!("box of side {side} has no boundary ring at spacing {}", g.spacing())));
    }
    Ok(ring_points(g.point(x), r, outward(g, x, center)).into_iter().filter_map(|q| g.vertex_at(q)).collect())
}

fn bfs<F: Fn(EdgeId, VertexId) -> bool>(g: &GhostGraph, from: VertexId, allowed: F) -> Vec<bool> {
    let mut seen = vec![false; g.num_vertices()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &e in g.incident(u) {
            if g.is_ghost_edge(e) {
                continue;
            }
            let w = g.other_end(e, u);
            if !seen[w] && allowed(e, w) {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// `D_i`, `T_i` and `A_i` for a trace ending at `x_i = t.end()`.
///
/// `extra` holds further removed edges (the exploration around the target
/// point). The boundary order is oriented by the side of the annulus centred
/// at `center` on which `x_i` lies.
pub fn explored_domain(
    g: &GhostGraph,
    t: &BackboneTrace,
    extra: &[EdgeId],
    center: (f64, f64),
) -> Result<ExploredDomain> {
    let x = t.end();
    if g.is_ghost(x) {
        return Err(Error::Geometry("trace ended at the ghost".into()));
    }
    let ring = boundary_ring(g, x, 1.0, center)?;
    let mut touched = vec![false; g.num_vertices()];
    for &e in t.explored() {
        let ed = g.edge(e);
        touched[ed.u] = true;
        touched[ed.v] = true;
    }
    let hits: Vec<usize> = (0..ring.len()).filter(|&i| touched[ring[i]]).collect();
    let (Some(&lo), Some(&hi)) = (hits.first(), hits.last()) else {
        return Err(Error::Geometry(format!("explored set does not meet the unit box around vertex {x}")));
    };
    let mut removed = vec![false; g.num_vertices()];
    let omega_tilde: Vec<VertexId> =
        (0..ring.len()).filter(|&i| i <= lo || i >= hi).map(|i| ring[i]).collect();
    for &w in &omega_tilde {
        removed[w] = true;
    }
    let mut cut = vec![false; g.num_edges()];
    for &e in t.explored().iter().chain(extra) {
        cut[e] = true;
    }
    let in_d = bfs(g, x, |e, w| !cut[e] && !removed[w]);

    let r2 = lattice_radius(g, 2.0);
    let p = g.point(x);
    let inside2 = |w: VertexId| {
        let q = g.point(w);
        (q.x - p.x).abs() <= r2 && (q.y - p.y).abs() <= r2
    };
    let on2 = |w: VertexId| {
        let q = g.point(w);
        inside2(w) && ((q.x - p.x).abs() == r2 || (q.y - p.y).abs() == r2)
    };
    let reach = bfs(g, x, |e, w| {
        let ed = g.edge(e);
        !t.is_explored(e) && inside2(w) && !(on2(ed.u) && on2(ed.v))
    });
    let domain: Vec<VertexId> = (0..g.num_sites()).filter(|&w| in_d[w]).collect();
    let t_domain: Vec<VertexId> = (0..g.num_sites()).filter(|&w| in_d[w] || reach[w]).collect();
    let a_set: Vec<VertexId> = (0..g.num_sites()).filter(|&w| on2(w) && !in_d[w] && !reach[w]).collect();
    Ok(ExploredDomain { d: ring[lo], d_prime: ring[hi], omega_tilde, domain, t_domain, a_set })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backbone::explore_backbone;
    use crate::currents::{Class, Current, CurrentMeasureSpec, WormChain};
    use crate::model::SpinParams;

    fn odd_current(g: &GhostGraph, odd: &[EdgeId]) -> Current {
        let mut labels = vec![Class::Zero; g.num_edges()];
        for &e in odd {
            labels[e] = Class::Odd;
        }
        Current::from_labels(labels)
    }

    #[test]
    fn ring_order_is_clockwise_from_outside() {
        let pts = ring_points(Point::new(0, 0), 1, Direction::East);
        let expect = [(1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1)];
        assert_eq!(pts, expect.iter().map(|&(x, y)| Point::new(x, y)).collect::<Vec<_>>());
        let north = ring_points(Point::new(0, 0), 2, Direction::North);
        assert_eq!(north.len(), 16);
        assert_eq!(north[0], Point::new(0, 2));
        assert_eq!(north[1], Point::new(1, 2));
    }

    #[test]
    fn unit_box_needs_resolution() {
        let g = GhostGraph::build_box(1.0, 4.0, (0.0, 0.0)).unwrap();
        assert!(boundary_ring(&g, 0, 1.0, (0.0, 0.0)).is_err());
    }

    /// A straight segment entering the unit box at its boundary meets the
    /// ring in one point, so `d = d'`, and `D_i` is the interior of the box
    /// without the vertex the segment passed through.
    #[test]
    fn straight_entry_gives_single_point() {
        let g = GhostGraph::build_box(0.25, 1.0, (0.0, 0.0)).unwrap();
        let p = |x, y| g.vertex_at(Point::new(x, y)).unwrap();
        let odd = [g.lattice_edge(p(-2, 0), Direction::East).unwrap(), g.lattice_edge(p(-1, 0), Direction::East).unwrap()];
        let n = odd_current(&g, &odd);
        let t = explore_backbone(&g, &n, p(-2, 0), &[g.ghost(), p(0, 0)]).unwrap();
        let dom = explored_domain(&g, &t, &[], (-10.0, 0.0)).unwrap();
        assert_eq!(dom.d, p(-2, 0));
        assert_eq!(dom.d_prime, p(-2, 0));
        assert_eq!(dom.omega_tilde.len(), 16);
        let mut expect: Vec<VertexId> =
            [(-1, -1), (-1, 1), (0, -1), (0, 0), (0, 1), (1, -1), (1, 0), (1, 1)].iter().map(|&(x, y)| p(x, y)).collect();
        expect.sort();
        assert_eq!(dom.domain, expect);
    }

    /// A longer straight segment also inspects the edges turning off it, so
    /// the ring is touched at three consecutive points; everything outside
    /// the middle one is removed.
    #[test]
    fn long_segment_touches_three_points() {
        let g = GhostGraph::build_box(0.25, 4.0, (0.0, 0.0)).unwrap();
        let p = |x, y| g.vertex_at(Point::new(x, y)).unwrap();
        let odd: Vec<EdgeId> = (0..5).map(|k| g.lattice_edge(p(k, 0), Direction::East).unwrap()).collect();
        let n = odd_current(&g, &odd);
        let t = explore_backbone(&g, &n, p(0, 0), &[g.ghost(), p(5, 0)]).unwrap();
        let dom = explored_domain(&g, &t, &[], (0.0, 0.0)).unwrap();
        assert_eq!(dom.d, p(3, -1));
        assert_eq!(dom.d_prime, p(3, 1));
        assert_eq!(dom.omega_tilde.len(), 15);
        assert!(!dom.omega_tilde.contains(&p(3, 0)));
        assert_eq!(dom.domain.len(), 8);
        assert!(!dom.domain.contains(&p(4, 0)));
        assert!(dom.domain.iter().all(|&w| dom.t_domain.contains(&w)));
        assert!(dom.a_set.iter().all(|&w| !dom.t_domain.contains(&w)));
    }

    #[test]
    fn missing_intersection_is_geometry_error() {
        let g = GhostGraph::build_box(0.25, 2.0, (0.0, 0.0)).unwrap();
        let p = |x, y| g.vertex_at(Point::new(x, y)).unwrap();
        let odd = [g.lattice_edge(p(0, 0), Direction::East).unwrap()];
        let n = odd_current(&g, &odd);
        let t = explore_backbone(&g, &n, p(0, 0), &[g.ghost(), p(1, 0)]).unwrap();
        assert!(matches!(explored_domain(&g, &t, &[], (0.0, 0.0)), Err(Error::Geometry(_))));
    }

    /// Sampled backbones from the origin, stopped when they first leave
    /// `Λ_{r i}`: the domain stays inside `Λ_{r(i+1)}`.
    #[test]
    fn domains_stay_in_next_box() {
        let a = 0.25;
        let stride = 3.0;
        let g = GhostGraph::build_box(a, 4.0 * stride, (0.0, 0.0)).unwrap();
        let o = g.vertex_at(Point::new(0, 0)).unwrap();
        let x = g.vertex_at(Point::new(20, 3)).unwrap();
        let spec = CurrentMeasureSpec::from_lattice(&g, &SpinParams::critical(0.3), &[o, x]).unwrap();
        let mut chain = WormChain::new(&spec, 7, 0).unwrap();
        let mut checked = 0;
        for _ in 0..40 {
            let n = chain.sample(2);
            for i in 1..=2 {
                let half = stride * i as f64 / 2.0;
                let mut stop: Vec<VertexId> = (0..g.num_sites())
                    .filter(|&w| {
                        let (px, py) = g.position(w);
                        px.abs() > half + GEOM_EPS || py.abs() > half + GEOM_EPS
                    })
                    .collect();
                stop.push(g.ghost());
                let t = explore_backbone(&g, &n, o, &stop).unwrap();
                if t.hit_ghost() {
                    break;
                }
                let dom = explored_domain(&g, &t, &[], (0.0, 0.0)).unwrap();
                let outer = stride * (i + 1) as f64 / 2.0;
                for &w in &dom.domain {
                    let (px, py) = g.position(w);
                    assert!(px.abs() <= outer + GEOM_EPS && py.abs() <= outer + GEOM_EPS);
                }
                checked += 1;
            }
        }
        assert!(checked > 10, "only {checked} domains reached");
    }
}
