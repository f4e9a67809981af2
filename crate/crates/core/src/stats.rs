//! Small descriptive-statistics helpers shared by the harness and tests.

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the sample mean.
pub fn se_mean(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Standard error of the sample variance, from the fourth central moment:
/// `Var(s²) ≈ (m4 - s⁴) / n`.
pub fn se_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let v = variance(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    (((m4 - v * v).max(0.0)) / n).sqrt()
}

/// Raw moment `E x^p`.
pub fn raw_moment(xs: &[f64], p: i32) -> f64 {
    xs.iter().map(|x| x.powi(p)).sum::<f64>() / xs.len() as f64
}

/// Standard error of the raw moment estimate.
pub fn se_raw_moment(xs: &[f64], p: i32) -> f64 {
    let n = xs.len() as f64;
    let m = raw_moment(xs, p);
    let m2 = xs.iter().map(|x| x.powi(2 * p)).sum::<f64>() / n;
    (((m2 - m * m).max(0.0)) / n).sqrt()
}

/// Least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParams(
            "slope needs two equally long series with at least two points".into(),
        ));
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParams("slope undefined for constant x".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

/// Least-squares line `y = intercept + slope * x`, returned as
/// `(intercept, slope)`.
pub fn ols_line(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let slope = ols_slope(x, y)?;
    Ok((mean(y) - slope * mean(x), slope))
}
