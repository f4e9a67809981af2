//! Distances between an empirical sample and a centered Gaussian.
//!
//! The 1-Wasserstein distance between real laws equals the L¹ distance of
//! their quantile functions, so the empirical version reduces to quadrature
//! of `|F_emp^{-1}(u) - sigma * Phi^{-1}(u)|` over the unit interval.  An
//! empirical sample of size M keeps a distance of order M^{-1/2} from its
//! own law; that floor is estimated by meta-simulation so reports can
//! separate method error from sampling noise.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::mc::seed::replication_rng;
use crate::stats;

/// Nodes for the quantile-coupling quadrature.
const QUANTILE_NODES: usize = 10_000;

/// Meta-trials used to estimate the empirical Wasserstein floor.
const FLOOR_TRIALS: u64 = 8;

fn checked_sorted(sample: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if sample.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "distance needs at least two points, got {}",
            sample.len()
        )));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParams(format!(
            "comparison Gaussian needs a positive finite sigma, got {sigma}"
        )));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams(
            "distance sample contains non-finite values".into(),
        ));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    Ok(sorted)
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit Gaussian parameters are valid")
}

/// 1-Wasserstein distance from the empirical law of `sample` to
/// `N(0, sigma^2)`, via mid-rank quantile coupling.
pub fn wasserstein1_to_gaussian(sample: &[f64], sigma: f64) -> Result<f64> {
    let sorted = checked_sorted(sample, sigma)?;
    let normal = standard_normal();
    let m = sorted.len();
    let mut acc = 0.0;
    for j in 0..QUANTILE_NODES {
        let u = (j as f64 + 0.5) / QUANTILE_NODES as f64;
        let idx = ((u * m as f64) as usize).min(m - 1);
        acc += (sorted[idx] - sigma * normal.inverse_cdf(u)).abs();
    }
    Ok(acc / QUANTILE_NODES as f64)
}

/// Kolmogorov-Smirnov statistic of `sample` against `N(0, sigma^2)`.
pub fn ks_to_gaussian(sample: &[f64], sigma: f64) -> Result<f64> {
    let sorted = checked_sorted(sample, sigma)?;
    let normal = standard_normal();
    let m = sorted.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let cdf = normal.cdf(x / sigma);
        sup = sup
            .max(((i + 1) as f64 / m - cdf).abs())
            .max((i as f64 / m - cdf).abs());
    }
    Ok(sup)
}

/// Expected 1-Wasserstein distance between an exact Gaussian sample of size
/// `m` and its own law, averaged over a few meta-trials.  This is the
/// irreducible part of any empirical `w1` at that sample size.
pub fn w1_empirical_floor(m: usize, sigma: f64, seed: u64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParams(
            "floor estimation needs sample size at least 2".into(),
        ));
    }
    let mut total = 0.0;
    for trial in 0..FLOOR_TRIALS {
        let mut rng = replication_rng(seed, trial);
        let draws: Vec<f64> = (0..m)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        total += wasserstein1_to_gaussian(&draws, sigma)?;
    }
    Ok(total / FLOOR_TRIALS as f64)
}

/// Empirical moments and distances of one sample against its Gaussian limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub sample_size: usize,
    pub mean: f64,
    pub variance: f64,
    pub fourth_moment: f64,
    /// 1-Wasserstein distance to `N(0, sigma_squared)`.
    pub w1: f64,
    /// Kolmogorov-Smirnov statistic against the same Gaussian.
    pub ks: f64,
    /// Variance of the comparison Gaussian.
    pub sigma_squared: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub se_fourth: f64,
    /// Simulated `w1` of an exact Gaussian sample of the same size; the
    /// part of `w1` attributable to finite sample size alone.
    pub w1_floor: f64,
}

/// Builds the full report for one sample.  `floor_seed` keys the floor
/// meta-simulation so the report stays deterministic.
pub fn distance_report(sample: &[f64], sigma_squared: f64, floor_seed: u64) -> Result<DistanceReport> {
    if !(sigma_squared > 0.0) {
        return Err(Error::InvalidParams(format!(
            "comparison variance must be positive, got {sigma_squared}"
        )));
    }
    let sigma = sigma_squared.sqrt();
    Ok(DistanceReport {
        sample_size: sample.len(),
        mean: stats::mean(sample),
        variance: stats::variance(sample),
        fourth_moment: stats::raw_moment(sample, 4),
        w1: wasserstein1_to_gaussian(sample, sigma)?,
        ks: ks_to_gaussian(sample, sigma)?,
        sigma_squared,
        se_mean: stats::se_mean(sample),
        se_variance: stats::se_variance(sample),
        se_fourth: stats::se_raw_moment(sample, 4),
        w1_floor: w1_empirical_floor(sample.len(), sigma, floor_seed)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn midrank_gaussian_sample(m: usize, sigma: f64) -> Vec<f64> {
        let normal = standard_normal();
        (0..m)
            .map(|i| sigma * normal.inverse_cdf((i as f64 + 0.5) / m as f64))
            .collect()
    }

    #[test]
    fn midrank_quantile_sample_is_nearly_coupled() {
        let m = 1000;
        let sigma = 1.7;
        let sample = midrank_gaussian_sample(m, sigma);
        let w1 = wasserstein1_to_gaussian(&sample, sigma).unwrap();
        assert!(w1 < 2.0 * sigma / m as f64, "w1 = {w1}");
        let ks = ks_to_gaussian(&sample, sigma).unwrap();
        assert!(ks <= 1.0 / m as f64, "ks = {ks}");
    }

    #[test]
    fn point_mass_recovers_gaussian_mean_absolute_value() {
        let sample = vec![0.0; 500];
        let w1 = wasserstein1_to_gaussian(&sample, 1.0).unwrap();
        let expected = (2.0 / std::f64::consts::PI).sqrt();
        assert!((w1 - expected).abs() < 2e-3, "w1 = {w1} vs {expected}");
    }

    #[test]
    fn translation_moves_the_distance_by_at_most_the_shift() {
        let mut rng = replication_rng(11, 0);
        let sample: Vec<f64> = (0..400).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let base = wasserstein1_to_gaussian(&sample, 1.0).unwrap();
        for c in [0.25, -0.6, 1.5] {
            let shifted: Vec<f64> = sample.iter().map(|x| x + c).collect();
            let moved = wasserstein1_to_gaussian(&shifted, 1.0).unwrap();
            assert!(
                (moved - base).abs() <= c.abs() + 1e-12,
                "shift {c}: {base} -> {moved}"
            );
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(wasserstein1_to_gaussian(&[1.0], 1.0).is_err());
        assert!(wasserstein1_to_gaussian(&[1.0, 2.0], 0.0).is_err());
        assert!(wasserstein1_to_gaussian(&[1.0, f64::NAN], 1.0).is_err());
        assert!(distance_report(&[1.0, 2.0, 3.0], -2.0, 0).is_err());
    }

    #[test]
    fn exact_gaussian_draws_pass_their_own_normality_screen() {
        // Harness soundness: exact N(0,2) samples must sit at the empirical
        // floor in w1 and below the 5% critical value in KS almost always.
        let m = 10_000;
        let sigma_sq = 2.0f64;
        let sigma = sigma_sq.sqrt();
        let trials = 100;
        let mut ks_ok = 0;
        let mut w1_sum = 0.0;
        for t in 0..trials {
            let mut rng = replication_rng(404, t);
            let sample: Vec<f64> = (0..m)
                .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let w1 = wasserstein1_to_gaussian(&sample, sigma).unwrap();
            let ks = ks_to_gaussian(&sample, sigma).unwrap();
            assert!(w1 < 5.0 * sigma / (m as f64).sqrt(), "trial {t}: w1 = {w1}");
            w1_sum += w1;
            if ks < 1.358 / (m as f64).sqrt() {
                ks_ok += 1;
            }
        }
        assert!(ks_ok >= 90, "only {ks_ok} of {trials} KS passes");
        let w1_mean = w1_sum / trials as f64;
        assert!(w1_mean < 2.0 * sigma / (m as f64).sqrt(), "mean w1 = {w1_mean}");
    }

    #[test]
    fn report_fields_are_consistent() {
        let mut rng = replication_rng(7, 0);
        let sample: Vec<f64> = (0..600).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let report = distance_report(&sample, 1.0, 3).unwrap();
        assert_eq!(report.sample_size, 600);
        assert!(report.w1 >= 0.0);
        assert!(report.ks > 0.0 && report.ks < 1.0);
        assert!(report.w1_floor > 0.0);
        assert!((report.variance - 1.0).abs() < 4.0 * report.se_variance + 0.2);
    }
}
