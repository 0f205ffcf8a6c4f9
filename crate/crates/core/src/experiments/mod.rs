//! Scaled-down Monte Carlo reproductions: exponent scans, mass fits,
//! backbone survival across annuli, near-critical crossing ratios, mixing
//! ratios and cluster-size moments.
//!
//! Every point of a scan draws from its own stream, seeded by
//! [`derive_seed`](crate::rng::derive_seed) of the global seed and the point
//! index, so output does not depend on scheduling.

mod fit;
mod rsw;
mod scans;
mod survival;

pub use fit::{decades, fit_exp_power, fit_power_law, wls, FitResult};
pub use rsw::{mixing_ratio, near_critical_rsw_ratio, MixEvent, RswReport};
pub use scans::{
    cluster_moment_scan, critical_twopoint_scan, mass_scan, one_arm_scan, truncated_estimate, two_point_estimate,
    MassConfig, TwoPointConfig,
};
pub use survival::{backbone_survival, SurvivalConfig, SurvivalReport};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::numeric::batch_mean_stderr;
use crate::record::EstimateRecord;

/// Batches used for error bars throughout.
pub const BATCHES: usize = 20;

/// Records, fits and notes of one scan.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ScanOutput {
    pub records: Vec<EstimateRecord>,
    pub fits: BTreeMap<String, FitResult>,
    /// Warnings and excluded points.
    pub notes: Vec<String>,
}

impl ScanOutput {
    pub fn fit(&self, name: &str) -> Option<&FitResult> {
        self.fits.get(name)
    }

    /// CSV text: a header over the union of parameter keys, then one row per
    /// record.
    pub fn to_csv(&self) -> String {
        let mut keys: Vec<String> = self.records.iter().flat_map(|r| r.params.keys().cloned()).collect();
        keys.sort();
        keys.dedup();
        let mut out = EstimateRecord::csv_header(&keys);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row(&keys));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

pub(crate) fn record(observable: &str, p: &[(&str, f64)], xs: &[f64], seed: u64) -> EstimateRecord {
    let (mean, stderr) = batch_mean_stderr(xs, BATCHES);
    EstimateRecord::new(observable, params(p), mean, stderr, xs.len(), seed)
}
