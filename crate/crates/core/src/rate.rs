//! Least-squares rate fits `e ≈ C h^p` and `e ≈ C |log h|^{-p}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    /// `e ≈ C h^p`
    PowerInH,
    /// `e ≈ C |log h|^{-p}`
    PowerInLog,
}

impl RateModel {
    pub fn as_str(self) -> &'static str {
        match self {
            RateModel::PowerInH => "power_in_h",
            RateModel::PowerInLog => "power_in_log",
        }
    }

    fn abscissa(self, h: f64) -> f64 {
        match self {
            RateModel::PowerInH => h.ln(),
            RateModel::PowerInLog => h.ln().abs().ln(),
        }
    }

    /// `e h^{-p}` or `e |log h|^p`.
    pub fn scale(self, h: f64, e: f64, p: f64) -> f64 {
        match self {
            RateModel::PowerInH => e * h.powf(-p),
            RateModel::PowerInLog => e * h.ln().abs().powf(p),
        }
    }
}

impl fmt::Display for RateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RateModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power_in_h" | "h" => Ok(RateModel::PowerInH),
            "power_in_log" | "log" => Ok(RateModel::PowerInLog),
            other => Err(invalid(format!("unknown rate model {other:?} (power_in_h or power_in_log)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub model: RateModel,
    pub exponent: f64,
    pub constant: f64,
    pub r_squared: f64,
    pub scaled_residuals: Vec<f64>,
}

/// Fits `(h, e)` pairs. Needs at least three points with distinct `h`, and `e > 0`.
pub fn fit_rate(points: &[(f64, f64)], model: RateModel) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(invalid(format!("a rate fit needs at least 3 points, got {}", points.len())));
    }
    for &(h, e) in points {
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid(format!("mesh size must be positive and finite, got {h}")));
        }
        if model == RateModel::PowerInLog && !(h < 1.0) {
            return Err(invalid(format!("the logarithmic model needs h < 1, got {h}")));
        }
        if !(e > 0.0) || !e.is_finite() {
            return Err(invalid(format!("errors must be positive and finite, got {e}")));
        }
    }
    let xs: Vec<f64> = points.iter().map(|&(h, _)| model.abscissa(h)).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, e)| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(invalid("mesh sizes must be distinct"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    let exponent = match model {
        RateModel::PowerInH => slope,
        RateModel::PowerInLog => -slope,
    };
    let scaled_residuals = points.iter().map(|&(h, e)| model.scale(h, e, exponent)).collect();
    Ok(RateFit { model, exponent, constant: intercept.exp(), r_squared, scaled_residuals })
}

/// `max / min` of a positive sequence.
pub fn band_ratio(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_power_in_h() {
        let pts: Vec<_> = (2..8).map(|k| 2f64.powi(-k)).map(|h| (h, h * h)).collect();
        let fit = fit_rate(&pts, RateModel::PowerInH).unwrap();
        assert_relative_eq!(fit.exponent, 2.0, epsilon = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.constant, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn exact_power_in_log() {
        let pts: Vec<_> = (6..15).map(|k| 2f64.powi(-k)).map(|h: f64| (h, h.ln().powi(-2))).collect();
        let fit = fit_rate(&pts, RateModel::PowerInLog).unwrap();
        assert_relative_eq!(fit.exponent, 2.0, epsilon = 1e-12);
        for s in fit.scaled_residuals {
            assert_relative_eq!(s, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_rate(&[(0.5, 1.0), (0.25, 0.5)], RateModel::PowerInH).is_err());
        assert!(fit_rate(&[(0.5, 1.0), (0.25, 0.0), (0.1, 0.1)], RateModel::PowerInH).is_err());
        assert!(fit_rate(&[(0.5, 1.0), (0.5, 0.5), (0.5, 0.1)], RateModel::PowerInH).is_err());
    }
}
