//! Decay exponent of `|x|·sup_{|x|=r}|A − A₀|` near the inner boundary.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fields::DecayTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Ok,
    /// `A = A₀` on every fitted sphere; the slope is undefined.
    ZeroField,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    /// NaN when `status` is `ZeroField`.
    pub slope: f64,
    pub intercept: f64,
    pub radii_used: usize,
    pub status: FitStatus,
    /// `1 − θ`.
    pub target: f64,
    /// `slope ≥ (1 − θ) − 0.1`.
    pub meets_target: bool,
}

/// Least-squares slope of `log(r·sup|A − A₀|)` against `log r` over the
/// inner half of the tabulated radii (order `l = 0` rows).
pub fn fit_decay_rate(table: &DecayTable, theta: f64) -> Result<DecayFit> {
    if !(theta > 0.0 && theta < 1.0) {
        return invalid(format!("theta must lie in (0, 1), got {theta}"));
    }
    let series = table.series(0);
    if series.len() < 4 {
        return invalid(format!("decay fit needs at least 4 radii, got {}", series.len()));
    }
    let (lo, hi) = (series[0].0, series[series.len() - 1].0);
    if hi < 10.0 * lo * (1.0 - 1e-12) {
        return invalid(format!("radii [{lo}, {hi}] span less than one decade"));
    }
    let inner = &series[..series.len().div_ceil(2)];
    let target = 1.0 - theta;
    if inner.iter().all(|p| p.1 == 0.0) {
        return Ok(DecayFit {
            slope: f64::NAN,
            intercept: f64::NAN,
            radii_used: inner.len(),
            status: FitStatus::ZeroField,
            target,
            meets_target: false,
        });
    }
    if inner.iter().any(|p| !(p.1 > 0.0)) {
        return invalid("some fitted spheres have zero deviation; the logarithmic fit is undefined");
    }
    let xs: Vec<f64> = inner.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = inner.iter().map(|p| (p.0 * p.1).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit {
        slope,
        intercept: my - slope * mx,
        radii_used: inner.len(),
        status: FitStatus::Ok,
        target,
        meets_target: slope >= target - 0.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::DecayRow;

    fn table(rs: &[f64], f: impl Fn(f64) -> f64) -> DecayTable {
        let rows = rs.iter().rev().map(|&r| DecayRow { r, l: 0, coord_sup: f(r), cov_sup: f(r) }).collect();
        DecayTable { rows, samples_per_sphere: 1, fitted_constant: 1.0 }
    }

    #[test]
    fn recovers_a_power_law() {
        let rs: Vec<f64> = (0..8).map(|i| 0.01 * 1.5f64.powi(i)).collect();
        let fit = fit_decay_rate(&table(&rs, |r| 3.0 * r.powf(-0.5)), 0.5).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert_eq!(fit.radii_used, 4);
        assert!(fit.meets_target);
    }

    #[test]
    fn zero_field_is_flagged() {
        let rs: Vec<f64> = (0..6).map(|i| 0.01 * 2f64.powi(i)).collect();
        let fit = fit_decay_rate(&table(&rs, |_| 0.0), 0.5).unwrap();
        assert!(fit.slope.is_nan());
        assert_eq!(fit.status, FitStatus::ZeroField);
    }

    #[test]
    fn needs_enough_radii() {
        assert!(fit_decay_rate(&table(&[0.1, 0.2, 1.0], |r| r), 0.5).is_err());
        assert!(fit_decay_rate(&table(&[0.1, 0.2, 0.3, 0.5], |r| r), 0.5).is_err());
        assert!(fit_decay_rate(&table(&[0.1, 0.2, 0.3, 1.0], |r| r), 1.5).is_err());
    }
}
