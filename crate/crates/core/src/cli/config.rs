//! Run configuration loaded from TOML and overridden by flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{beta_critical, FieldSchedule, SpinParams, FIELD_EXPONENT};

pub const CONFIG_KEYS: [&str; 9] = ["a", "h", "beta", "box", "stride", "budget", "seed", "output_dir", "field_schedule"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Uniform,
    /// Zero field within sup-distance 1 of the sources.
    ZeroedNearEndpoints,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    a: Option<f64>,
    h: Option<f64>,
    beta: Option<f64>,
    #[serde(rename = "box")]
    box_side: Option<f64>,
    stride: Option<f64>,
    budget: Option<f64>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    field_schedule: Option<ScheduleKind>,
}

/// Resolved and validated configuration. Serialized into every output header.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub a: f64,
    pub h: f64,
    pub beta: f64,
    #[serde(rename = "box")]
    pub box_side: f64,
    pub stride: f64,
    /// Samples per estimate.
    pub budget: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub field_schedule: ScheduleKind,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            h: 0.0,
            beta: beta_critical(),
            box_side: 8.0,
            stride: 3.0,
            budget: 10_000,
            seed: 1,
            output_dir: PathBuf::from("out"),
            field_schedule: ScheduleKind::Uniform,
        }
    }
}

/// Values given on the command line; they take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub a: Option<f64>,
    pub h: Option<f64>,
    pub beta: Option<f64>,
    pub box_side: Option<f64>,
    pub stride: Option<f64>,
    pub budget: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub field_schedule: Option<ScheduleKind>,
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, &Overrides::default())
}

/// Parses TOML text, applies `over` and validates.
pub fn parse_config(text: &str, over: &Overrides) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        if msg.contains("unknown field") {
            Error::Config(format!("{msg}; valid keys are {}", CONFIG_KEYS.join(", ")))
        } else {
            Error::Config(msg)
        }
    })?;
    let d = RunConfig::default();
    let budget = over.budget.or(raw.budget).unwrap_or(d.budget as f64);
    if !(budget >= 1.0) || budget.fract() != 0.0 || budget > 1e15 {
        return Err(Error::Config(format!("budget must be a whole number >= 1, got {budget}")));
    }
    let cfg = RunConfig {
        a: over.a.or(raw.a).unwrap_or(d.a),
        h: over.h.or(raw.h).unwrap_or(d.h),
        beta: over.beta.or(raw.beta).unwrap_or(d.beta),
        box_side: over.box_side.or(raw.box_side).unwrap_or(d.box_side),
        stride: over.stride.or(raw.stride).unwrap_or(d.stride),
        budget: budget as usize,
        seed: over.seed.or(raw.seed).unwrap_or(d.seed),
        output_dir: over.output_dir.clone().or(raw.output_dir).unwrap_or(d.output_dir),
        field_schedule: over.field_schedule.or(raw.field_schedule).unwrap_or(d.field_schedule),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.a > 0.0 && self.a <= 1.0) {
            return bad(format!("a must lie in (0, 1], got {}", self.a));
        }
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return bad(format!("h must be finite and >= 0, got {}", self.h));
        }
        let scaled = self.h * self.a.powf(FIELD_EXPONENT);
        if scaled > 1.0 {
            return bad(format!("h a^(15/8) = {scaled} violates the admissibility condition h a^(15/8) <= 1"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be finite and > 0, got {}", self.beta));
        }
        if !(self.box_side >= 0.0 && self.box_side.is_finite()) {
            return bad(format!("box must be finite and >= 0, got {}", self.box_side));
        }
        if !(self.stride > 0.0 && self.stride.is_finite()) {
            return bad(format!("stride must be finite and > 0, got {}", self.stride));
        }
        Ok(())
    }

    /// Spin parameters; `sources` are the points the zeroed schedule avoids.
    pub fn spin(&self, sources: &[(f64, f64)]) -> SpinParams {
        let field = match self.field_schedule {
            ScheduleKind::Uniform => FieldSchedule::Uniform(self.h),
            ScheduleKind::ZeroedNearEndpoints => {
                FieldSchedule::ZeroedNear { h: self.h, points: sources.to_vec(), radius: 1.0 }
            }
        };
        SpinParams { beta: self.beta, field }
    }
}
