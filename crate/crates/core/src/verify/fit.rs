//! Least-squares fits on log-transformed data.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Ordinary least squares `y ≈ slope x + intercept`; `None` with fewer than
/// two distinct abscissae.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let sxx: f64 = x[..n].iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some(LineFit { slope, intercept: my - slope * mx, points: n })
}

/// Slope of `ln v` against `ln t` over the points with `t` in `[lo, hi]` and `v > 0`.
pub fn log_log_slope(t: &[f64], v: &[f64], lo: f64, hi: f64) -> Option<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(v)
        .filter(|(a, b)| **a >= lo && **a <= hi && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    fit_line(&lx, &ly)
}
