//! Monte Carlo estimate records shared by samplers and scans.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub observable: String,
    /// Parameters such as `a`, `h` and geometry, in sorted key order.
    pub params: BTreeMap<String, f64>,
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Seconds spent; kept out of serialized output so files are
    /// reproducible byte for byte.
    #[serde(skip)]
    pub wall_time: f64,
}

impl EstimateRecord {
    pub fn new(
        observable: &str,
        params: BTreeMap<String, f64>,
        mean: f64,
        stderr: f64,
        n_samples: usize,
        seed: u64,
    ) -> Self {
        Self { observable: observable.to_string(), params, mean, stderr: stderr.max(0.0), n_samples, seed, wall_time: 0.0 }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    /// CSV header for records whose parameter keys are `keys`.
    pub fn csv_header(keys: &[String]) -> String {
        let mut cols = vec!["observable".to_string()];
        cols.extend(keys.iter().cloned());
        cols.extend(["mean", "stderr", "n", "seed"].map(String::from));
        cols.join(",")
    }

    pub fn csv_row(&self, keys: &[String]) -> String {
        let mut cols = vec![self.observable.clone()];
        for k in keys {
            cols.push(self.params.get(k).map_or(String::new(), |v| format!("{v}")));
        }
        cols.push(format!("{}", self.mean));
        cols.push(format!("{}", self.stderr));
        cols.push(self.n_samples.to_string());
        cols.push(self.seed.to_string());
        cols.join(",")
    }
}
