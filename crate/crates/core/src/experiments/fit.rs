//! Weighted least-squares line fits.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    /// `power-law` or `exponential-with-power-correction`.
    pub model: String,
    /// Exponent or rate in the sign convention of the observable.
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Covariance of `(intercept, slope)`.
    pub covariance: [[f64; 2]; 2],
    pub r_squared: f64,
    pub chi2_per_dof: f64,
    pub residuals: Vec<f64>,
    pub n_points: usize,
}

impl FitResult {
    pub fn is_finite(&self) -> bool {
        [self.exponent, self.exponent_stderr, self.slope, self.intercept, self.r_squared]
            .iter()
            .chain(self.covariance.iter().flatten())
            .all(|x| x.is_finite())
    }

    /// Relabels the fit; `sign` converts the slope into the exponent.
    pub fn named(mut self, model: &str, sign: f64) -> Self {
        self.model = model.to_string();
        self.exponent = sign * self.slope;
        self
    }
}

/// Fits `y = intercept + slope·x` with weights `w` (inverse variances).
///
/// The parameter covariance is scaled by the reduced χ² when there are more
/// points than parameters, so it reflects the actual scatter.
pub fn wls(xs: &[f64], ys: &[f64], ws: &[f64]) -> Result<FitResult> {
    let n = xs.len();
    if n < 2 || ys.len() != n || ws.len() != n {
        return Err(Error::Parameter(format!("line fit needs at least 2 matching points, got {n}")));
    }
    if xs.iter().chain(ys).chain(ws).any(|v| !v.is_finite()) || ws.iter().any(|&w| w <= 0.0) {
        return Err(Error::Parameter("line fit inputs must be finite with positive weights".into()));
    }
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(ws).map(|(x, w)| w * (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Parameter("line fit needs at least two distinct x values".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).zip(ws).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - intercept - slope * x).collect();
    let chi2: f64 = residuals.iter().zip(ws).map(|(r, w)| w * r * r).sum();
    let syy: f64 = ys.iter().zip(ws).map(|(y, w)| w * (y - my).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - chi2 / syy } else { 1.0 };
    let dof = n.saturating_sub(2);
    let scale = if dof > 0 { chi2 / dof as f64 } else { 1.0 };
    let var_slope = scale / sxx;
    let var_icept = scale * (1.0 / sw + mx * mx / sxx);
    let cov = -scale * mx / sxx;
    Ok(FitResult {
        model: "line".into(),
        exponent: slope,
        exponent_stderr: var_slope.sqrt(),
        slope,
        intercept,
        covariance: [[var_icept, cov], [cov, var_slope]],
        r_squared,
        chi2_per_dof: if dof > 0 { chi2 / dof as f64 } else { 0.0 },
        residuals,
        n_points: n,
    })
}

/// Power law `y ∝ x^{−exponent}` fitted in log-log form with weights from the
/// standard errors of `y`.
pub fn fit_power_law(xs: &[f64], ys: &[f64], stderrs: &[f64], decreasing: bool) -> Result<FitResult> {
    let (lx, ly, w) = log_points(xs, ys, stderrs)?;
    Ok(wls(&lx, &ly, &w)?.named("power-law", if decreasing { -1.0 } else { 1.0 }))
}

/// `y ≈ C x^{−1/4} e^{−m x}` fitted as a line in `log(y x^{1/4})`; the
/// exponent is the rate `m`.
pub fn fit_exp_power(xs: &[f64], ys: &[f64], stderrs: &[f64]) -> Result<FitResult> {
    let yc: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y * x.powf(0.25)).collect();
    let sc: Vec<f64> = xs.iter().zip(stderrs).map(|(x, s)| s * x.powf(0.25)).collect();
    let (_, ly, w) = log_points(xs, &yc, &sc)?;
    Ok(wls(xs, &ly, &w)?.named("exponential-with-power-correction", -1.0))
}

fn log_points(xs: &[f64], ys: &[f64], stderrs: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    if xs.len() != ys.len() || xs.len() != stderrs.len() {
        return Err(Error::Parameter("fit inputs differ in length".into()));
    }
    if let Some(i) = (0..xs.len()).find(|&i| !(xs[i] > 0.0 && ys[i] > 0.0)) {
        return Err(Error::Parameter(format!("log fit needs positive data, point {i} is ({}, {})", xs[i], ys[i])));
    }
    let lx = xs.iter().map(|x| x.ln()).collect();
    let ly = ys.iter().map(|y| y.ln()).collect();
    // Var(log y) ≈ (σ/y)²; exact data gets a tiny floor instead of a zero.
    let w = ys.iter().zip(stderrs).map(|(y, s)| 1.0 / (s / y).powi(2).max(1e-12)).collect();
    Ok((lx, ly, w))
}

/// Base-10 decades covered by positive values.
pub fn decades(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo > 0.0 && hi > 0.0 {
        (hi / lo).log10()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let f = wls(&xs, &ys, &[1.0; 4]).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept - 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(f.is_finite());
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(wls(&[1.0], &[1.0], &[1.0]).is_err());
        assert!(wls(&[1.0, 1.0], &[1.0, 2.0], &[1.0, 1.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, -1.0], &[0.1, 0.1], true).is_err());
    }

    /// Synthetic power laws with uniform multiplicative noise of 2% standard
    /// deviation.
    #[test]
    fn recovers_power_law_exponents() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let half = 0.02 * 3f64.sqrt();
        for target in [0.125, 0.25, 1.875] {
            let xs: Vec<f64> = (0..12).map(|k| 2f64.powf(k as f64 / 2.0)).collect();
            let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-target) * (1.0 + rng.gen_range(-half..half))).collect();
            let se: Vec<f64> = ys.iter().map(|y| 0.02 * y).collect();
            let f = fit_power_law(&xs, &ys, &se, true).unwrap();
            assert!((f.exponent - target).abs() < 3.0 * f.exponent_stderr + 1e-3, "{target}: {f:?}");
            assert!((f.exponent - target).abs() < 0.03);
        }
    }

    #[test]
    fn recovers_exponential_rate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let half = 0.03 * 3f64.sqrt();
        for m in [0.3, 0.8, 1.5] {
            let xs: Vec<f64> = (2..10).map(|r| r as f64).collect();
            let ys: Vec<f64> =
                xs.iter().map(|x| 0.4 * x.powf(-0.25) * (-m * x).exp() * (1.0 + rng.gen_range(-half..half))).collect();
            let se: Vec<f64> = ys.iter().map(|y| 0.03 * y).collect();
            let f = fit_exp_power(&xs, &ys, &se).unwrap();
            assert!((f.exponent - m).abs() < 0.02, "{m}: {}", f.exponent);
        }
    }

    #[test]
    fn decade_count() {
        assert!((decades(&[1.0, 0.5, 0.125]) - 0.903).abs() < 1e-3);
        assert_eq!(decades(&[]), 0.0);
    }
}
