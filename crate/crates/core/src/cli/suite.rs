//! Verification suites run by `verify`: exact identities on a family of small
//! ghost graphs, and samplers against exact marginals.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::backbone::{explored_sets, verify_markov};
use crate::coupling::{truncation_identity, verify_coupling_law};
use crate::currents::{enumerate_sourced, CurrentMeasureSpec, WormChain};
use crate::error::Result;
use crate::fk::{enumerate_fk, ghost_cluster_check, mask_connected, verify_fkg_mon, Boundary, FkParams, SwChain};
use crate::ising_exact::correlations;
use crate::lattice::{GhostGraph, Point, VertexId};
use crate::model::{beta_critical, Couplings, FieldSchedule, SpinParams};

/// Tolerances of the exact suite.
pub const CORRELATION_TOL: f64 = 1e-10;
pub const TRUNCATION_TOL: f64 = 1e-10;
pub const COUPLING_TOL: f64 = 1e-10;
pub const MARKOV_TOL: f64 = 1e-12;
pub const GHOST_CLUSTER_TOL: f64 = 1e-12;
/// Largest allowed per-edge marginal error of the samplers.
pub const SAMPLER_TOL: f64 = 0.01;

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub graph: GhostGraph,
    pub spin: SpinParams,
}

impl Instance {
    /// First and last site: the default source pair.
    fn ends(&self) -> (VertexId, VertexId) {
        (0, self.graph.num_sites() - 1)
    }
}

const SHAPES: &[(&str, &[(i32, i32)])] = &[
    ("domino", &[(0, 0), (1, 0)]),
    ("path3", &[(0, 0), (1, 0), (2, 0)]),
    ("path4", &[(0, 0), (1, 0), (2, 0), (3, 0)]),
    ("path5", &[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]),
    ("path6", &[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0)]),
    ("corner", &[(0, 0), (1, 0), (0, 1)]),
    ("square", &[(0, 0), (1, 0), (0, 1), (1, 1)]),
    ("tee", &[(0, 0), (1, 0), (2, 0), (1, 1)]),
    ("skew", &[(0, 0), (1, 0), (1, 1), (2, 1)]),
    ("ell", &[(0, 0), (1, 0), (2, 0), (2, 1)]),
    ("plus", &[(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]),
    ("cup", &[(0, 0), (0, 1), (1, 0), (2, 0), (2, 1)]),
    ("flag", &[(0, 0), (1, 0), (0, 1), (1, 1), (0, 2)]),
    ("step", &[(0, 0), (1, 0), (0, 1), (1, 1), (2, 0)]),
];

/// Small ghost graphs with at most `max_edges` edges (ghost edges included)
/// under three coupling regimes.
pub fn exact_instances(max_edges: usize) -> Result<Vec<Instance>> {
    let bc = beta_critical();
    let mut out = Vec::new();
    for &(name, pts) in SHAPES {
        let graph = GhostGraph::from_points(1.0, pts.iter().map(|&(x, y)| Point::new(x, y)))?;
        if graph.num_edges() > max_edges {
            continue;
        }
        let first = graph.position(0);
        let regimes = [
            ("critical", SpinParams::critical(0.3)),
            ("cold", SpinParams::with_beta(0.7, 0.8)),
            ("zeroed", SpinParams { beta: bc, field: FieldSchedule::ZeroedNear { h: 0.6, points: vec![first], radius: 0.0 } }),
        ];
        for (regime, spin) in regimes {
            out.push(Instance { name: format!("{name}/{regime}"), graph: graph.clone(), spin });
        }
    }
    Ok(out)
}

/// Worst value of one check over the instances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check: String,
    pub cases: usize,
    pub worst: f64,
    pub worst_case: String,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub instances: usize,
    pub checks: Vec<CheckSummary>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.check == name)
    }
}

/// Deviations per check for one instance: `(check, case label, value)`.
type Findings = Vec<(&'static str, String, f64)>;

fn summarize(suite: &str, instances: usize, findings: Vec<Findings>, tolerances: &[(&'static str, f64)]) -> SuiteReport {
    let mut by_check: BTreeMap<&str, Vec<(String, f64)>> = BTreeMap::new();
    for (check, case, v) in findings.into_iter().flatten() {
        by_check.entry(check).or_default().push((case, v));
    }
    let checks: Vec<CheckSummary> = tolerances
        .iter()
        .map(|&(check, tol)| {
            let cases = by_check.remove(check).unwrap_or_default();
            let (worst_case, worst) = cases
                .iter()
                .fold((String::new(), 0.0f64), |acc, (c, v)| if !(*v <= acc.1) { (c.clone(), *v) } else { acc });
            CheckSummary { check: check.to_string(), cases: cases.len(), worst, worst_case, tolerance: tol, pass: worst <= tol }
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    SuiteReport { suite: suite.to_string(), instances, checks, pass }
}

/// Exact identities:
/// - spin correlations against ratios of current partition functions;
/// - the truncated-correlation identity;
/// - the current/FK coupling law;
/// - the Markov property of the backbone on every explored set;
/// - the ghost cluster law;
/// - FKG and domain monotonicity for connection events (reported as the most
///   negative gap, which must not exceed 0).
pub fn exact_suite(max_edges: usize) -> Result<SuiteReport> {
    let instances = exact_instances(max_edges)?;
    let findings = instances.par_iter().map(exact_findings).collect::<Result<Vec<_>>>()?;
    Ok(summarize(
        "exact",
        instances.len(),
        findings,
        &[
            ("correlation", CORRELATION_TOL),
            ("truncation", TRUNCATION_TOL),
            ("coupling", COUPLING_TOL),
            ("markov", MARKOV_TOL),
            ("ghost_cluster", GHOST_CLUSTER_TOL),
            ("fkg_mon", 0.0),
        ],
    ))
}

fn exact_findings(inst: &Instance) -> Result<Findings> {
    let g = &inst.graph;
    let c = Couplings::from_lattice(g, &inst.spin)?;
    let n = g.num_sites();
    let ghost = g.ghost();
    let mut out: Findings = Vec::new();
    let label = |what: String| format!("{} {what}", inst.name);

    let empty = CurrentMeasureSpec::new(c.clone(), &[])?;
    let z0 = enumerate_sourced(&empty)?.partition();
    let mut sets: Vec<Vec<VertexId>> = Vec::new();
    for u in 0..n {
        sets.push(vec![u, ghost]);
        for v in u + 1..n {
            sets.push(vec![u, v]);
        }
    }
    let spins = correlations(&c, &sets)?;
    for (set, &corr) in sets.iter().zip(&spins) {
        let za = enumerate_sourced(&empty.with_sources(set)?)?.partition();
        out.push(("correlation", label(format!("{set:?}")), (za / z0 - corr).abs()));
    }

    let (o, x) = inst.ends();
    for y in 1..n {
        let r = truncation_identity(&c, o, y)?;
        out.push(("truncation", label(format!("({o}, {y})")), r.identity_gap));
    }

    for (u, v) in [(o, x), (o, ghost)] {
        if let Some(r) = verify_coupling_law(&c, u, v)? {
            out.push(("coupling", label(format!("({u}, {v})")), r.tv));
        }
    }

    if x != o {
        let spec = CurrentMeasureSpec::new(c.clone(), &[o, x])?;
        if spec.is_realizable() {
            let mut stops = vec![vec![ghost, x]];
            if n > 2 {
                stops.push(vec![ghost, x, n / 2]);
            }
            for stop in stops {
                for (f, _) in explored_sets(g, &spec, o, &stop)? {
                    let tv = verify_markov(g, &spec, o, &stop, &f)?.max_tv();
                    out.push(("markov", label(format!("stop {stop:?} F {f:?}")), tv));
                }
            }
        }
    }

    let fk = FkParams::new(g, &inst.spin, Boundary::Free)?;
    let r = ghost_cluster_check(&fk)?;
    out.push(("ghost_cluster", label("free".into()), r.max_marginal_deviation.max(r.max_joint_deviation)));

    let ends = c.all_ends().to_vec();
    let nv = c.num_vertices();
    let sub: Vec<usize> = (0..g.num_edges()).filter(|&e| g.edge(e).u != x && g.edge(e).v != x).collect();
    let pairs = [((o, ghost), (o, x)), ((o, x), (x, ghost))];
    for ((a1, a2), (b1, b2)) in pairs {
        let ea = |m: u64| mask_connected(&ends, nv, m, a1, a2);
        let eb = |m: u64| mask_connected(&ends, nv, m, b1, b2);
        let r = verify_fkg_mon(&fk, ea, eb, &sub)?;
        out.push(("fkg_mon", label(format!("{a1}~{a2}, {b1}~{b2}")), (-r.fkg_gap).max(-r.mon_gap).max(0.0)));
    }
    Ok(out)
}

/// Number of Markov-property cases in an exact-suite report.
pub fn markov_cases(report: &SuiteReport) -> usize {
    report.check("markov").map_or(0, |c| c.cases)
}

/// Swendsen–Wang and worm samplers against exact per-edge marginals: the
/// largest `|p̂_e − p_e|` on each instance, with `samples` sweeps each.
pub fn sampler_suite(max_edges: usize, samples: usize, seed: u64) -> Result<SuiteReport> {
    let instances = exact_instances(max_edges)?;
    let findings = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| sampler_findings(inst, samples, crate::rng::derive_seed(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("sampler", instances.len(), findings, &[("fk_marginals", SAMPLER_TOL), ("worm_marginals", SAMPLER_TOL)]))
}

fn max_gap(counts: &[usize], samples: usize, exact: &[f64]) -> f64 {
    counts.iter().zip(exact).map(|(&k, &p)| (k as f64 / samples as f64 - p).abs()).fold(0.0, f64::max)
}

fn sampler_findings(inst: &Instance, samples: usize, seed: u64) -> Result<Findings> {
    let g = &inst.graph;
    let m = g.num_edges();
    let mut out: Findings = Vec::new();

    let fk = FkParams::new(g, &inst.spin, Boundary::Free)?;
    let exact = enumerate_fk(&fk)?.edge_marginals();
    let mut ch = SwChain::new(fk, seed, 0);
    ch.run(crate::fk::DEFAULT_BURN_IN);
    let mut counts = vec![0usize; m];
    for _ in 0..samples {
        ch.sweep();
        for e in ch.bonds().open_edges() {
            counts[e] += 1;
        }
    }
    out.push(("fk_marginals", inst.name.clone(), max_gap(&counts, samples, &exact)));

    let (o, x) = inst.ends();
    let spec = CurrentMeasureSpec::from_lattice(g, &inst.spin, &[o, x])?;
    let exact = enumerate_sourced(&spec)?.trace_law()?.edge_marginals();
    let mut worm = WormChain::new(&spec, seed, 1)?;
    worm.sample(crate::fk::DEFAULT_BURN_IN);
    let mut counts = vec![0usize; m];
    for _ in 0..samples {
        for (e, open) in worm.sample(1).trace().into_iter().enumerate() {
            counts[e] += usize::from(open);
        }
    }
    out.push(("worm_marginals", inst.name.clone(), max_gap(&counts, samples, &exact)));
    Ok(out)
}
