//! Least-squares line fits for the scaling and decay summaries.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% half-width of the slope; absent with fewer than three points.
    pub slope_half_width: Option<f64>,
    /// Residual sum of squares.
    pub ssr: f64,
    pub points: usize,
}

/// Ordinary least squares `y = intercept + slope·x`. Needs at least two
/// distinct abscissae.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = x[..n].iter().sum::<f64>() / nf;
    let my = y[..n].iter().sum::<f64>() / nf;
    let sxx: f64 = x[..n].iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x[..n].iter().zip(&y[..n]).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x[..n]
        .iter()
        .zip(&y[..n])
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let slope_half_width = if n > 2 {
        let dof = nf - 2.0;
        let se = (ssr / dof / sxx).sqrt();
        StudentsT::new(0.0, 1.0, dof)
            .ok()
            .map(|t| t.inverse_cdf(0.975) * se)
    } else {
        None
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_half_width,
        ssr,
        points: n,
    })
}

/// Fit of `ln y` against `ln x`; non-positive entries are dropped.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    linear_fit(&lx, &ly)
}
