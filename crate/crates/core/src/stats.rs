//! Sample statistics and time grids.

use serde::Serialize;

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Standard error of the mean, treating the samples as independent.
pub fn std_err(xs: &[f64]) -> f64 {
    std_dev(xs) / (xs.len() as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl MeanEstimate {
    pub fn of(xs: &[f64]) -> Self {
        Self { mean: mean(xs), stderr: std_err(xs), samples: xs.len() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the residuals.
    pub residual_norm: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::domain("linear fit needs two or more paired samples"));
    }
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("linear fit needs distinct abscissae"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_norm = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a - intercept).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(LinearFit { slope, intercept, residual_norm })
}

/// `n` points from `a` to `b` inclusive, evenly spaced.
pub fn lin_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` points from `a` to `b` inclusive, evenly spaced in `ln t`. Needs
/// `0 < a`.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    let mut g: Vec<f64> = lin_grid(la, lb, n).into_iter().map(f64::exp).collect();
    // pin the end points exactly
    if let Some(f) = g.first_mut() {
        *f = a;
    }
    if n > 1 {
        g[n - 1] = b;
    }
    g
}

/// Sample times for long-time averages: 200 points log-spaced in
/// `tJ in [1, 1e4]`.
pub fn long_time_grid() -> Vec<f64> {
    log_grid(1.0, 1e4, 200)
}
