//! Covariance functions shared by the exact sampler and the oracles.

/// Covariance of the self-similar process with stationary increments,
/// `(t^{2H} + s^{2H} - |t-s|^{2H}) / 2`, the same for every order.
pub fn covariance(s: f64, t: f64, hurst: f64) -> f64 {
    let two_h = 2.0 * hurst;
    0.5 * (t.abs().powf(two_h) + s.abs().powf(two_h) - (t - s).abs().powf(two_h))
}

/// Autocovariance of unit-spaced increments,
/// `(|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2`.
pub fn fgn_autocovariance(k: i64, hurst: f64) -> f64 {
    let two_h = 2.0 * hurst;
    let p = |x: i64| (x.abs() as f64).powf(two_h);
    0.5 * (p(k + 1) - 2.0 * p(k) + p(k - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn variance_is_power_law() {
        assert_relative_eq!(covariance(1.0, 1.0, 0.7), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            covariance(0.5, 0.5, 0.7),
            0.5f64.powf(1.4),
            max_relative = 1e-15
        );
        assert_eq!(covariance(0.0, 2.0, 0.9), 0.0);
    }

    #[test]
    fn half_hurst_gives_independent_increments() {
        assert_relative_eq!(covariance(1.0, 2.0, 0.5), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn increment_autocovariance_sums_to_block_variance() {
        // Var(X_n) = sum of the n^2 increment covariances.
        let hurst = 0.7;
        let n = 6_i64;
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += fgn_autocovariance(i - j, hurst);
            }
        }
        assert_relative_eq!(total, (n as f64).powf(2.0 * hurst), max_relative = 1e-12);
    }

    #[test]
    fn lag_zero_is_unit_variance() {
        assert_relative_eq!(fgn_autocovariance(0, 0.8), 1.0, max_relative = 1e-15);
    }
}
