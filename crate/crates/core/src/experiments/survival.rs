//! Backbone survival across a schedule of annuli around the origin.

use serde::Serialize;

use super::{params, record, wls, FitResult};
use crate::backbone::explore_backbone;
use crate::currents::{CurrentMeasureSpec, WormChain};
use crate::error::{Error, Result};
use crate::lattice::{GhostGraph, Point};
use crate::model::{FieldSchedule, SpinParams};
use crate::record::EstimateRecord;

#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalConfig {
    pub h: f64,
    pub a: f64,
    /// Annulus `i` is `A_{stride·i, stride·(i+1)}` (box sides in lattice
    /// units).
    pub stride: f64,
    /// Largest annulus index; the second source sits just outside annulus
    /// `max_index`.
    pub max_index: usize,
    pub samples: usize,
    /// Worm sweeps before the first sample and between samples.
    pub burn_in: usize,
    pub sweeps_per_sample: usize,
    pub seed: u64,
}

impl Default for SurvivalConfig {
    fn default() -> Self {
        Self { h: 0.2, a: 1.0, stride: 3.0, max_index: 6, samples: 6000, burn_in: 20, sweeps_per_sample: 1, seed: 1 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SurvivalReport {
    /// `survival` and `ghost_hit_rate` records per annulus index.
    pub records: Vec<EstimateRecord>,
    /// `S(i)`: fraction of backbones reaching annulus `i` before the ghost,
    /// for `i = 0..=max_index + 1` (the last entry counts backbones that
    /// reach the second source).
    pub survival: Vec<f64>,
    /// `1 − S(i+1)/S(i)`: ghost hits while in annulus `i`, given it is reached.
    pub hit_rates: Vec<f64>,
    /// Line fit of `log S(i)` against `i` over `i ≥ 2`.
    pub fit: Option<FitResult>,
    /// Smallest hit rate over indices `2..=max_index`.
    pub min_hit_rate: f64,
    /// Largest over smallest hit rate over indices `2..=max_index`.
    pub hit_ratio: f64,
    pub notes: Vec<String>,
}

impl SurvivalReport {
    /// Negative slope with `R² ≥ r2`.
    pub fn decays_geometrically(&self, r2: f64) -> bool {
        self.fit.as_ref().is_some_and(|f| f.slope < 0.0 && f.r_squared >= r2)
    }
}

/// Samples currents with sources `{0, x}` by the worm chain and explores the
/// backbone from `0` until it hits the ghost or `x`. The field is zeroed in
/// boxes of radius 1 around both sources.
pub fn backbone_survival(cfg: &SurvivalConfig) -> Result<SurvivalReport> {
    if cfg.samples == 0 || cfg.sweeps_per_sample == 0 {
        return Err(Error::Parameter("sample budget and sweeps per sample must be >= 1".into()));
    }
    if !(cfg.stride >= 2.0 * cfg.a) || cfg.max_index < 2 {
        return Err(Error::Parameter(format!(
            "need stride >= 2a and max index >= 2, got stride {} and max index {}",
            cfg.stride, cfg.max_index
        )));
    }
    let n = cfg.max_index;
    let levels = n + 2;
    let xdist = cfg.stride * (n + 1) as f64 / 2.0 + 2.0;
    let g = GhostGraph::build_box(cfg.a, 2.0 * xdist + 4.0, (0.0, 0.0))?;
    let o = g.vertex_at(Point::new(0, 0)).ok_or_else(|| Error::Geometry("box misses the origin".into()))?;
    let xi = (xdist / cfg.a).round() as i32;
    let x = g.vertex_at(Point::new(xi, 0)).ok_or_else(|| Error::Geometry("box misses the second source".into()))?;
    let spin = SpinParams {
        beta: crate::model::beta_critical(),
        field: FieldSchedule::ZeroedNear { h: cfg.h, points: vec![(0.0, 0.0), (f64::from(xi) * cfg.a, 0.0)], radius: 1.0 },
    };
    let spec = CurrentMeasureSpec::from_lattice(&g, &spin, &[o, x])?;
    let mut chain = WormChain::new(&spec, cfg.seed, 0)?;
    chain.sample(cfg.burn_in);
    let half = cfg.stride / 2.0;
    let level_of = |v| {
        let (px, py) = g.position(v);
        (((px.abs().max(py.abs()) + 1e-9) / half).floor() as usize).min(n + 1)
    };
    let stop = [g.ghost(), x];
    // reached[i][k]: sample k reached level i.
    let mut reached = vec![Vec::with_capacity(cfg.samples); levels];
    for _ in 0..cfg.samples {
        let current = chain.sample(cfg.sweeps_per_sample);
        let trace = explore_backbone(&g, &current, o, &stop)?;
        let top = if trace.hit_ghost() {
            trace.path().iter().take_while(|&&v| !g.is_ghost(v)).map(|&v| level_of(v)).max().unwrap_or(0)
        } else {
            n + 1
        };
        for (i, r) in reached.iter_mut().enumerate() {
            r.push(f64::from(u8::from(i <= top)));
        }
    }
    let base = [("a", cfg.a), ("h", cfg.h), ("stride", cfg.stride)];
    let mut records = Vec::new();
    let mut survival = Vec::with_capacity(levels);
    let mut hit_rates = Vec::with_capacity(levels - 1);
    let mut notes = Vec::new();
    for i in 0..levels {
        let mut p = base.to_vec();
        p.push(("index", i as f64));
        let r = record("survival", &p, &reached[i], cfg.seed);
        survival.push(r.mean);
        records.push(r);
        if i + 1 < levels {
            let here = reached[i].iter().sum::<f64>();
            let next = reached[i + 1].iter().sum::<f64>();
            let (rate, se) = if here > 0.0 {
                let q = 1.0 - next / here;
                (q, (q * (1.0 - q) / here).sqrt())
            } else {
                notes.push(format!("annulus {i} never reached"));
                (f64::NAN, 0.0)
            };
            hit_rates.push(rate);
            records.push(EstimateRecord::new("ghost_hit_rate", params(&p), rate, se, here.max(1.0) as usize, cfg.seed));
        }
    }
    let pts: Vec<(f64, f64)> = (2..levels).filter(|&i| survival[i] > 0.0).map(|i| (i as f64, survival[i].ln())).collect();
    if pts.len() < levels - 2 {
        notes.push("some annuli have zero survival and are left out of the fit".into());
    }
    let fit = if pts.len() >= 2 {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        Some(wls(&xs, &ys, &vec![1.0; xs.len()])?.named("log-survival-linear", 1.0))
    } else {
        notes.push("fewer than two annuli with positive survival; no fit".into());
        None
    };
    let window: Vec<f64> = hit_rates[2..=n].iter().copied().filter(|r| r.is_finite()).collect();
    let min_hit_rate = window.iter().copied().fold(f64::INFINITY, f64::min);
    let max_hit_rate = window.iter().copied().fold(0.0, f64::max);
    let hit_ratio = if min_hit_rate > 0.0 { max_hit_rate / min_hit_rate } else { f64::INFINITY };
    Ok(SurvivalReport { records, survival, hit_rates, fit, min_hit_rate, hit_ratio, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(h: f64) -> SurvivalConfig {
        SurvivalConfig { h, stride: 2.0, max_index: 3, samples: 400, ..Default::default() }
    }

    #[test]
    fn zero_field_never_hits_ghost() {
        let r = backbone_survival(&small(0.0)).unwrap();
        assert!(r.survival.iter().all(|&s| s == 1.0), "{:?}", r.survival);
        assert!(r.hit_rates.iter().all(|&q| q == 0.0));
    }

    #[test]
    fn survival_is_nonincreasing() {
        let r = backbone_survival(&small(0.5)).unwrap();
        assert!(r.survival.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.survival[r.survival.len() - 1] < 1.0);
    }

    #[test]
    fn deterministic() {
        let a = backbone_survival(&small(0.3)).unwrap();
        let b = backbone_survival(&small(0.3)).unwrap();
        assert_eq!(a.survival, b.survival);
    }

    #[test]
    fn rejects_bad_schedule() {
        let bad = SurvivalConfig { stride: 1.0, ..small(0.2) };
        assert!(backbone_survival(&bad).is_err());
    }
}
