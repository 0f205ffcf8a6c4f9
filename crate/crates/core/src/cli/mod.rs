//! Command-line front end: configuration, dispatch and output files.
//!
//! Exit codes: 0 on success, 1 when a verification suite fails, 2 on usage
//! or input errors. Every output file starts with a header holding the
//! version, the seed-splitting scheme and the resolved configuration, and
//! contains nothing time-dependent, so reruns are byte-identical.

mod config;
mod suite;

pub use config::{load_config, parse_config, Overrides, RunConfig, ScheduleKind, CONFIG_KEYS};
pub use suite::{
    exact_instances, exact_suite, markov_cases, sampler_suite, CheckSummary, Instance, SuiteReport, SAMPLER_TOL,
};

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::backbone::explore_backbone;
use crate::currents::{enumerate_sourced, CurrentMeasureSpec, WormChain};
use crate::error::{Error, Result};
use crate::experiments::{
    backbone_survival, cluster_moment_scan, critical_twopoint_scan, fit_exp_power, fit_power_law, mass_scan,
    mixing_ratio, near_critical_rsw_ratio, one_arm_scan, MassConfig, MixEvent, ScanOutput, SurvivalConfig,
    TwoPointConfig,
};
use crate::extremal::{extremal_length_report, oracle_solve, LengthReport};
use crate::fk::{enumerate_fk, Boundary, FkParams, SwChain, DEFAULT_BURN_IN};
use crate::ising_exact::correlations;
use crate::lattice::{ArcName, GhostGraph, Point, Quad, VertexId};
use crate::model::Couplings;
use crate::numeric::batch_mean_stderr;
use crate::record::EstimateRecord;
use crate::rng::SPLIT_SCHEME;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "nearcrit", version, about = "Near-critical 2D Ising laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Box side in lattice units.
    #[arg(long = "box")]
    box_side: Option<f64>,
    #[arg(long)]
    stride: Option<f64>,
    /// Samples per estimate; accepts forms like `1e5`.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    field_schedule: Option<Schedule>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Schedule {
    Uniform,
    ZeroedNearEndpoints,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact law of a small rectangle (spins, FK or currents).
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, default_value_t = 2)]
        width: usize,
        #[arg(long, default_value_t = 2)]
        height: usize,
        #[arg(long, value_enum, default_value_t = Model::Fk)]
        model: Model,
        /// Comma-separated vertex ids for the current sources.
        #[arg(long, value_delimiter = ',')]
        sources: Vec<usize>,
    },
    /// Swendsen–Wang estimates on a box around the origin.
    SampleFk {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, value_enum, default_value_t = Bc::Free)]
        boundary: Bc,
    },
    /// Worm estimates for currents with sources at the origin and `--x`.
    SampleCurrent {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: Option<f64>,
        /// Second source in lattice coordinates, `x,y`.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        x: Vec<i32>,
    },
    /// Backbone explorations of sampled currents, one JSON line each.
    Backbone {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long, value_delimiter = ',', num_args = 2)]
        x: Vec<i32>,
    },
    /// Exact identity or sampler verification suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Suite::Exact)]
        suite: Suite,
        #[arg(long, default_value_t = 12)]
        max_edges: usize,
    },
    /// Discrete extremal length of a quad given in text form.
    ExtremalLength {
        #[command(flatten)]
        common: Common,
        /// Quad file: `v x y`, `e u v` and `arc NAME v…` lines.
        #[arg(long)]
        quad: PathBuf,
        #[arg(long, value_enum, default_value_t = Pair::AbCd)]
        pair: Pair,
        #[arg(long, value_enum, default_value_t = Method::Dirichlet)]
        method: Method,
    },
    /// Monte Carlo scans with fits.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(value_enum)]
        kind: ScanKind,
        /// Spacing grid; fractions like `1/8` are accepted.
        #[arg(long, value_delimiter = ',', value_parser = parse_number)]
        a: Vec<f64>,
        /// Field grid (mass and RSW scans).
        #[arg(long = "h-grid", value_delimiter = ',', value_parser = parse_number)]
        h_grid: Vec<f64>,
        /// Size grid (RSW) or largest annulus index (survival).
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Distances (two-point).
        #[arg(long, value_delimiter = ',')]
        r: Vec<usize>,
        /// Lattice side in sites (two-point, mass).
        #[arg(long)]
        side: Option<usize>,
        /// Admissibility bound for `H n² π₁(n)` (RSW).
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
    },
    /// Fits a power law or a corrected exponential to a scan CSV.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        observable: String,
        /// Parameter column used as abscissa.
        #[arg(long)]
        x: String,
        #[arg(long, value_enum, default_value_t = FitModel::PowerLaw)]
        model: FitModel,
        /// Fit `y ∝ x^{−exponent}` rather than `x^{+exponent}`.
        #[arg(long)]
        decreasing: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum Model {
    Ising,
    Fk,
    Current,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Bc {
    Free,
    Wired,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    Exact,
    Sampler,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Pair {
    AbCd,
    DaBc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Dirichlet,
    Oracle,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScanKind {
    OneArm,
    TwoPoint,
    Mass,
    Survival,
    Rsw,
    Moments,
    Mixing,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FitModel {
    PowerLaw,
    ExpPower,
}

/// Parses `1e5`, `0.25` or `1/4`.
fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad number {s:?}"))?;
            p / q
        }
        None => s.trim().parse().map_err(|_| format!("bad number {s:?}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("bad number {s:?}"))
    }
}

enum Outcome {
    Done,
    VerificationFailed,
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::VerificationFailed) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn resolve(common: &Common, a: Option<f64>) -> Result<RunConfig> {
    let text = match &common.config {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let over = Overrides {
        a,
        h: common.h,
        beta: common.beta,
        box_side: common.box_side,
        stride: common.stride,
        budget: common.budget,
        seed: common.seed,
        output_dir: common.output_dir.clone(),
        field_schedule: common.field_schedule.map(|s| match s {
            Schedule::Uniform => ScheduleKind::Uniform,
            Schedule::ZeroedNearEndpoints => ScheduleKind::ZeroedNearEndpoints,
        }),
    };
    parse_config(&text, &over)
}

fn header_value(command: &str, cfg: &RunConfig) -> Value {
    json!({ "nearcrit_version": VERSION, "split_scheme": SPLIT_SCHEME, "command": command, "config": cfg })
}

fn csv_header(command: &str, cfg: &RunConfig) -> String {
    format!(
        "# nearcrit {VERSION}\n# split_scheme: {SPLIT_SCHEME}\n# command: {command}\n# config: {}\n",
        serde_json::to_string(cfg).expect("config serializes")
    )
}

fn write_out(cfg: &RunConfig, name: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let path = cfg.output_dir.join(name);
    std::fs::write(&path, body)?;
    println!("{}", path.display());
    Ok(path)
}

fn write_json(cfg: &RunConfig, command: &str, name: &str, result: &impl Serialize) -> Result<PathBuf> {
    let doc = json!({ "header": header_value(command, cfg), "result": result });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    write_out(cfg, name, &text)
}

fn write_csv(cfg: &RunConfig, command: &str, name: &str, records: &[EstimateRecord]) -> Result<PathBuf> {
    let out = ScanOutput { records: records.to_vec(), ..Default::default() };
    write_out(cfg, name, &(csv_header(command, cfg) + &out.to_csv()))
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Enumerate { common, a, width, height, model, sources } => {
            let cfg = resolve(&common, a)?;
            enumerate(&cfg, width, height, model, &sources)
        }
        Command::SampleFk { common, a, boundary } => sample_fk(&resolve(&common, a)?, boundary),
        Command::SampleCurrent { common, a, x } => sample_current(&resolve(&common, a)?, &x),
        Command::Backbone { common, a, x } => backbone(&resolve(&common, a)?, &x),
        Command::Verify { common, suite, max_edges } => verify(&resolve(&common, None)?, suite, max_edges),
        Command::ExtremalLength { common, quad, pair, method } => {
            extremal(&resolve(&common, None)?, &quad, pair, method)
        }
        Command::Scan { common, kind, a, h_grid, n, r, side, eps } => {
            let cfg = resolve(&common, None)?;
            scan(&cfg, kind, &ScanGrid { a, h: h_grid, n, r, side, eps })
        }
        Command::Fit { common, input, observable, x, model, decreasing } => {
            fit(&resolve(&common, None)?, &input, &observable, &x, model, decreasing)
        }
    }
}

fn enumerate(cfg: &RunConfig, width: usize, height: usize, model: Model, sources: &[usize]) -> Result<Outcome> {
    let g = GhostGraph::rectangle(cfg.a, width, height)?;
    let spin = cfg.spin(&[]);
    let c = Couplings::from_lattice(&g, &spin)?;
    let n = g.num_sites();
    let result = match model {
        Model::Ising => {
            let mut sets: Vec<Vec<VertexId>> = (0..n).map(|u| vec![u]).collect();
            for u in 0..n {
                for v in u + 1..n {
                    sets.push(vec![u, v]);
                }
            }
            let vals = correlations(&c, &sets)?;
            let pairs: Vec<Value> = sets[n..].iter().zip(&vals[n..]).map(|(s, v)| json!([s[0], s[1], v])).collect();
            json!({ "model": "ising", "sites": n, "magnetization": &vals[..n], "pair_correlations": pairs })
        }
        Model::Fk => {
            let law = enumerate_fk(&FkParams::new(&g, &spin, Boundary::Free)?)?;
            json!({ "model": "fk", "edges": g.num_edges(), "support": law.support_size(), "edge_marginals": law.edge_marginals() })
        }
        Model::Current => {
            let spec = CurrentMeasureSpec::new(c, sources)?;
            let law = enumerate_sourced(&spec)?;
            let marginals = if law.is_empty() { Vec::new() } else { law.trace_law()?.edge_marginals() };
            json!({ "model": "current", "sources": sources, "partition": law.partition(), "trace_marginals": marginals })
        }
    };
    write_json(cfg, "enumerate", "enumerate.json", &result)?;
    Ok(Outcome::Done)
}

fn origin(g: &GhostGraph) -> Result<VertexId> {
    g.vertex_at(Point::new(0, 0)).ok_or_else(|| Error::Geometry("box does not contain the origin".into()))
}

fn sample_fk(cfg: &RunConfig, bc: Bc) -> Result<Outcome> {
    let g = GhostGraph::build_box(cfg.a, cfg.box_side, (0.0, 0.0))?;
    let o = origin(&g)?;
    let bd = g.outer_boundary();
    let boundary = match bc {
        Bc::Free => Boundary::Free,
        Bc::Wired => Boundary::Wired,
    };
    let p = FkParams::new(&g, &cfg.spin(&[(0.0, 0.0)]), boundary)?;
    let mut ch = SwChain::new(p.clone(), cfg.seed, 0);
    ch.run(DEFAULT_BURN_IN);
    let m = g.num_internal_edges().max(1) as f64;
    let (mut dens, mut arm, mut ghost) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..cfg.budget {
        ch.sweep();
        dens.push(ch.bonds().open_edges().filter(|&e| e < g.num_internal_edges()).count() as f64 / m);
        let mut uf = ch.bonds().connectivity(&p, true);
        let r = uf.find(o);
        arm.push(f64::from(u8::from(bd.iter().any(|&b| uf.find(b) == r))));
        ghost.push(f64::from(u8::from(uf.find(g.ghost()) == r)));
    }
    let params = |extra: f64| {
        [("a", cfg.a), ("h", cfg.h), ("box", cfg.box_side), ("wired", extra)]
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect()
    };
    let wired = f64::from(u8::from(matches!(bc, Bc::Wired)));
    let rec = |name: &str, xs: &[f64]| {
        let (mean, se) = batch_mean_stderr(xs, crate::experiments::BATCHES);
        EstimateRecord::new(name, params(wired), mean, se, xs.len(), cfg.seed)
    };
    let records = [rec("open_density", &dens), rec("origin_to_boundary", &arm), rec("origin_to_ghost", &ghost)];
    write_csv(cfg, "sample-fk", "sample_fk.csv", &records)?;
    Ok(Outcome::Done)
}

/// Box, origin and second source for the current commands; the default
/// second source sits a quarter of the box to the right.
fn sourced_setup(cfg: &RunConfig, x: &[i32]) -> Result<(GhostGraph, VertexId, VertexId, CurrentMeasureSpec)> {
    let g = GhostGraph::build_box(cfg.a, cfg.box_side, (0.0, 0.0))?;
    let o = origin(&g)?;
    let xp = match x {
        [] => Point::new(((cfg.box_side / 4.0) / cfg.a).round().max(1.0) as i32, 0),
        [px, py] => Point::new(*px, *py),
        _ => return Err(Error::Parameter("--x takes two coordinates".into())),
    };
    let xv = g.vertex_at(xp).ok_or_else(|| Error::Geometry(format!("source {xp:?} is outside the box")))?;
    if xv == o {
        return Err(Error::Parameter("the two sources coincide".into()));
    }
    let spin = cfg.spin(&[(0.0, 0.0), g.position(xv)]);
    let spec = CurrentMeasureSpec::from_lattice(&g, &spin, &[o, xv])?;
    Ok((g, o, xv, spec))
}

fn sample_current(cfg: &RunConfig, x: &[i32]) -> Result<Outcome> {
    let (g, _, xv, spec) = sourced_setup(cfg, x)?;
    let mut worm = WormChain::new(&spec, cfg.seed, 0)?;
    worm.sample(DEFAULT_BURN_IN);
    let (mut odd, mut dens, mut ghost) = (Vec::new(), Vec::new(), Vec::new());
    let m = g.num_edges() as f64;
    for _ in 0..cfg.budget {
        let c = worm.sample(1);
        odd.push((0..c.len()).filter(|&e| c.is_odd(e)).count() as f64);
        dens.push(c.trace().iter().filter(|&&t| t).count() as f64 / m);
        ghost.push(f64::from(u8::from((0..g.num_sites()).any(|v| c.is_odd(g.ghost_edge(v))))));
    }
    let (px, py) = g.position(xv);
    let params: std::collections::BTreeMap<String, f64> =
        [("a", cfg.a), ("h", cfg.h), ("box", cfg.box_side), ("x", px), ("y", py)].iter().map(|&(k, v)| (k.to_string(), v)).collect();
    let rec = |name: &str, xs: &[f64]| {
        let (mean, se) = batch_mean_stderr(xs, crate::experiments::BATCHES);
        EstimateRecord::new(name, params.clone(), mean, se, xs.len(), cfg.seed)
    };
    let records = [rec("odd_edges", &odd), rec("trace_density", &dens), rec("ghost_odd", &ghost)];
    write_csv(cfg, "sample-current", "sample_current.csv", &records)?;
    Ok(Outcome::Done)
}

fn backbone(cfg: &RunConfig, x: &[i32]) -> Result<Outcome> {
    let (g, o, xv, spec) = sourced_setup(cfg, x)?;
    let mut worm = WormChain::new(&spec, cfg.seed, 0)?;
    worm.sample(DEFAULT_BURN_IN);
    let stop = [g.ghost(), xv];
    let mut text = serde_json::to_string(&header_value("backbone", cfg)).expect("header serializes");
    text.push('\n');
    for k in 0..cfg.budget {
        let t = explore_backbone(&g, &worm.sample(1), o, &stop)?;
        let path: Vec<Value> =
            t.path().iter().map(|&v| if g.is_ghost(v) { json!("ghost") } else { json!([g.point(v).x, g.point(v).y]) }).collect();
        let line = json!({ "sample": k, "hit_ghost": t.hit_ghost(), "steps": t.num_steps(), "explored": t.explored().len(), "path": path });
        let _ = writeln!(text, "{line}");
    }
    write_out(cfg, "backbone.jsonl", &text)?;
    Ok(Outcome::Done)
}

fn verify(cfg: &RunConfig, which: Suite, max_edges: usize) -> Result<Outcome> {
    let (report, name) = match which {
        Suite::Exact => (exact_suite(max_edges)?, "verify_exact.json"),
        Suite::Sampler => (sampler_suite(max_edges, cfg.budget, cfg.seed)?, "verify_sampler.json"),
    };
    write_json(cfg, "verify", name, &report)?;
    for c in &report.checks {
        eprintln!("{} {}: worst {:.3e} over {} cases (tolerance {:.0e})", if c.pass { "PASS" } else { "FAIL" }, c.check, c.worst, c.cases, c.tolerance);
    }
    Ok(if report.pass { Outcome::Done } else { Outcome::VerificationFailed })
}

fn extremal(cfg: &RunConfig, quad: &Path, pair: Pair, method: Method) -> Result<Outcome> {
    let text = std::fs::read_to_string(quad).map_err(|e| Error::Config(format!("cannot read {}: {e}", quad.display())))?;
    let q = Quad::parse(&text)?;
    let arcs = match pair {
        Pair::AbCd => (ArcName::Ab, ArcName::Cd),
        Pair::DaBc => (ArcName::Da, ArcName::Bc),
    };
    let report = match method {
        Method::Dirichlet => extremal_length_report(&q, arcs)?,
        Method::Oracle => {
            let s = oracle_solve(&q, arcs)?;
            LengthReport { length: s.length, method: "oracle", residual: s.residual }
        }
    };
    write_json(cfg, "extremal-length", "extremal_length.json", &report)?;
    Ok(Outcome::Done)
}

struct ScanGrid {
    a: Vec<f64>,
    h: Vec<f64>,
    n: Vec<usize>,
    r: Vec<usize>,
    side: Option<usize>,
    eps: f64,
}

fn or<T: Clone>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() {
        default.to_vec()
    } else {
        given.to_vec()
    }
}

fn scan(cfg: &RunConfig, kind: ScanKind, grid: &ScanGrid) -> Result<Outcome> {
    let a_grid = or(&grid.a, &[1.0, 0.5, 0.25, 0.125]);
    let (name, out) = match kind {
        ScanKind::OneArm => ("one_arm", one_arm_scan(&a_grid, cfg.box_side, cfg.budget, cfg.seed)?),
        ScanKind::TwoPoint => {
            let c = TwoPointConfig {
                distances: or(&grid.r, &TwoPointConfig::default().distances),
                side: grid.side.unwrap_or(128),
                window: 16,
                samples: cfg.budget,
                seed: cfg.seed,
            };
            ("two_point", critical_twopoint_scan(&c)?)
        }
        ScanKind::Mass => {
            let d = MassConfig::default();
            let c = MassConfig {
                h_values: or(&grid.h, &d.h_values),
                side: grid.side.unwrap_or(d.side),
                samples: cfg.budget,
                seed: cfg.seed,
                ..d
            };
            ("mass", mass_scan(&c)?)
        }
        ScanKind::Survival => {
            let c = SurvivalConfig {
                h: cfg.h,
                a: cfg.a,
                stride: cfg.stride,
                max_index: grid.n.first().copied().unwrap_or(6),
                samples: cfg.budget,
                seed: cfg.seed,
                ..Default::default()
            };
            let r = backbone_survival(&c)?;
            let mut fits = std::collections::BTreeMap::new();
            if let Some(f) = r.fit.clone() {
                fits.insert("log_survival".to_string(), f);
            }
            let mut notes = r.notes.clone();
            notes.push(format!("min hit rate {:.6}, hit-rate spread {:.6}", r.min_hit_rate, r.hit_ratio));
            ("survival", ScanOutput { records: r.records, fits, notes })
        }
        ScanKind::Rsw => {
            let n = or(&grid.n, &[8, 16, 24]);
            let h = or(&grid.h, &[0.0, 0.002, 0.005, 0.01, 0.02]);
            let r = near_critical_rsw_ratio(&n, &h, grid.eps, cfg.budget, cfg.seed)?;
            ("rsw", ScanOutput { records: r.records, fits: Default::default(), notes: r.notes })
        }
        ScanKind::Moments => {
            let b = cfg.box_side / 4.0;
            ("moments", cluster_moment_scan(&a_grid, cfg.box_side, b, (cfg.box_side / 4.0, 0.0), cfg.budget, cfg.seed)?)
        }
        ScanKind::Mixing => {
            let l = cfg.box_side / 8.0;
            let e1 = MixEvent::OneArm { center: (-cfg.box_side / 4.0, 0.0), side: l };
            let e2 = MixEvent::OneArm { center: (cfg.box_side / 4.0, 0.0), side: l };
            let r = mixing_ratio(cfg.a, cfg.box_side, (&e1, &e2), cfg.budget, cfg.seed)?;
            ("mixing", ScanOutput { records: vec![r], ..Default::default() })
        }
    };
    let command = format!("scan {name}");
    write_csv(cfg, &command, &format!("scan_{name}.csv"), &out.records)?;
    write_json(cfg, &command, &format!("scan_{name}_fit.json"), &json!({ "fits": out.fits, "notes": out.notes }))?;
    Ok(Outcome::Done)
}

/// `(x, mean, stderr)` rows of `observable` from a CSV written by `scan`.
fn read_rows(text: &str, observable: &str, x: &str) -> Result<Vec<(f64, f64, f64)>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::Parameter("empty CSV".into()))?.split(',').collect();
    let col = |name: &str| {
        header.iter().position(|h| *h == name).ok_or_else(|| Error::Parameter(format!("CSV has no column {name:?}")))
    };
    let (co, cx, cm, cs) = (col("observable")?, col(x)?, col("mean")?, col("stderr")?);
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != header.len() {
            return Err(Error::Parameter(format!("CSV row {} has {} fields, expected {}", i + 1, f.len(), header.len())));
        }
        if f[co] != observable {
            continue;
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Parameter(format!("CSV row {}: bad number {s:?}", i + 1)));
        rows.push((num(f[cx])?, num(f[cm])?, num(f[cs])?));
    }
    if rows.is_empty() {
        return Err(Error::Parameter(format!("no rows with observable {observable:?}")));
    }
    Ok(rows)
}

fn fit(cfg: &RunConfig, input: &Path, observable: &str, x: &str, model: FitModel, decreasing: bool) -> Result<Outcome> {
    let text = std::fs::read_to_string(input).map_err(|e| Error::Config(format!("cannot read {}: {e}", input.display())))?;
    let rows = read_rows(&text, observable, x)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let se: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let result = match model {
        FitModel::PowerLaw => fit_power_law(&xs, &ys, &se, decreasing)?,
        FitModel::ExpPower => fit_exp_power(&xs, &ys, &se)?,
    };
    write_json(cfg, "fit", "fit.json", &result)?;
    Ok(Outcome::Done)
}
