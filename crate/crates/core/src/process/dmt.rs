//! Large-scale approximate sampler: normalized partial sums of Hermite
//! polynomials of a long-memory stationary Gaussian sequence.
//!
//! The driving covariance is `r(k) = (1 + k^2)^{(H-1)/q}`, whose tail
//! `k^{2(H-1)/q}` puts the partial sums in the domain of attraction of the
//! order-`q` limit process.  The normalization uses the exact covariance of
//! the finite sum, so the variance at `t = 1` is 1 by construction, and for
//! order 2 the full cumulant structure of the sum is available exactly
//! through Toeplitz traces.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::chaos::hermite_poly;
use crate::error::{Error, Result};
use crate::process::fgn::StationaryGaussian;
use crate::process::params::{HermiteParams, SamplePath, SimMethod};

/// Caps `n * max(t)` so a single draw stays within a desk-scale budget.
const MAX_SEQUENCE_LEN: usize = 1 << 24;

/// Resolution of the partial-sum sampler: summands per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DmtConfig {
    pub n: usize,
}

impl DmtConfig {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams(
                "summands per unit time must be positive".into(),
            ));
        }
        Ok(DmtConfig { n })
    }
}

/// Driving autocovariance `r(k) = (1 + k^2)^{(H-1)/q}`.
pub fn driving_autocovariance(k: usize, params: HermiteParams) -> f64 {
    let mu = (params.hurst - 1.0) / params.q as f64;
    (1.0 + (k as f64) * (k as f64)).powf(mu)
}

/// Partial-sum sampler with a fixed sequence length.
pub struct DmtSampler {
    config: DmtConfig,
    params: HermiteParams,
    len: usize,
    normalization: f64,
    noise: StationaryGaussian,
}

impl DmtSampler {
    /// `max_t` bounds the largest time the sampler will be asked for.
    pub fn new(config: DmtConfig, params: HermiteParams, max_t: f64) -> Result<Self> {
        params.validate()?;
        if !(max_t > 0.0) {
            return Err(Error::InvalidParams("max time must be positive".into()));
        }
        let len = (config.n as f64 * max_t).floor() as usize;
        if len < 1 {
            return Err(Error::InvalidParams(
                "n * max_t below one summand; increase the resolution".into(),
            ));
        }
        if len > MAX_SEQUENCE_LEN {
            return Err(Error::InvalidParams(format!(
                "sequence length {len} exceeds the budget {MAX_SEQUENCE_LEN}"
            )));
        }
        let noise = StationaryGaussian::new(len.max(2), |k| driving_autocovariance(k, params))?;
        let normalization = sum_variance(config.n, params).sqrt();
        Ok(DmtSampler {
            config,
            params,
            len,
            normalization,
            noise,
        })
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// One path draw at the requested times, reusing a single underlying
    /// sequence so increments are consistent across time points.
    pub fn draw<R: Rng + ?Sized>(&self, t_points: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let q = self.params.q;
        let q_fact: f64 = (1..=q).map(|k| k as f64).product();
        let xi = self.noise.sample(rng);
        let mut values = Vec::with_capacity(t_points.len());
        let mut partial = 0.0;
        let mut consumed = 0usize;
        for &t in t_points {
            let upto = (self.config.n as f64 * t).floor() as usize;
            if upto > self.len {
                return Err(Error::InvalidParams(format!(
                    "time {t} needs {upto} summands, sampler holds {}",
                    self.len
                )));
            }
            while consumed < upto {
                partial += q_fact * hermite_poly(q, xi[consumed]);
                consumed += 1;
            }
            values.push(partial / self.normalization);
        }
        Ok(values)
    }

    pub fn sample(&self, t_points: &[f64], seed: u64) -> Result<SamplePath> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = self.draw(t_points, &mut rng)?;
        SamplePath::new(
            t_points.to_vec(),
            values,
            SimMethod::DmtSum,
            self.params,
            seed,
        )
    }
}

/// Convenience wrapper building a sampler sized for the last time point.
pub fn sample_dmt(
    config: DmtConfig,
    params: HermiteParams,
    t_points: &[f64],
    seed: u64,
) -> Result<SamplePath> {
    let max_t = t_points
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1.0 / config.n as f64);
    DmtSampler::new(config, params, max_t)?.sample(t_points, seed)
}

/// Exact variance of the un-normalized sum of `n` summands,
/// `q! * sum_{|a| < n} (n - |a|) r(a)^q`.
pub fn sum_variance(n: usize, params: HermiteParams) -> f64 {
    let q = params.q;
    let q_fact: f64 = (1..=q).map(|k| k as f64).product();
    let mut acc = n as f64; // lag 0, r(0) = 1
    for a in 1..n {
        acc += 2.0 * (n - a) as f64 * driving_autocovariance(a, params).powi(q as i32);
    }
    q_fact * acc
}

/// Exact fourth cumulant of the normalized value at `t = 1` for order 2:
/// `12 tr(R^4) / tr(R^2)^2`, with `R` the driving Toeplitz covariance.
///
/// `tr(R^2)` is a lag sum; `tr(R^4) = |R^2|_F^2` is accumulated row by row,
/// each row of `R^2` being one circulant-embedded Toeplitz matvec.
pub fn fourth_cumulant_order2(n: usize, params: HermiteParams) -> Result<f64> {
    if params.q != 2 {
        return Err(Error::Mode(
            "the Toeplitz-trace cumulant applies to order 2 only".into(),
        ));
    }
    params.validate()?;
    let r: Vec<f64> = (0..n).map(|k| driving_autocovariance(k, params)).collect();

    let mut tr_r2 = n as f64;
    for a in 1..n {
        tr_r2 += 2.0 * (n - a) as f64 * r[a] * r[a];
    }

    // Circulant embedding of R: one forward FFT of the symmetrized first row,
    // then each matvec is FFT -> pointwise multiply -> inverse FFT.
    let m = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut row = vec![Complex::new(0.0, 0.0); m];
    for (k, &v) in r.iter().enumerate() {
        row[k] = Complex::new(v, 0.0);
        if k > 0 {
            row[m - k] = Complex::new(v, 0.0);
        }
    }
    fwd.process(&mut row);

    let tr_r4: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            // Row i of R as a length-m vector, transformed, filtered, inverted.
            let mut buf = vec![Complex::new(0.0, 0.0); m];
            for j in 0..n {
                buf[j] = Complex::new(r[(j as i64 - i as i64).unsigned_abs() as usize], 0.0);
            }
            fwd.process(&mut buf);
            for (b, c) in buf.iter_mut().zip(&row) {
                *b *= c;
            }
            inv.process(&mut buf);
            let scale = 1.0 / m as f64;
            buf[..n]
                .iter()
                .map(|c| {
                    let v = c.re * scale;
                    v * v
                })
                .sum::<f64>()
        })
        .sum();

    Ok(12.0 * tr_r4 / (tr_r2 * tr_r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, variance};
    use approx::assert_relative_eq;

    #[test]
    fn unit_time_variance_is_one_by_construction() {
        let params = HermiteParams::new(2, 0.7).unwrap();
        let config = DmtConfig::new(64).unwrap();
        let sampler = DmtSampler::new(config, params, 1.0).unwrap();
        // The normalization equals the exact standard deviation of the sum,
        // so the only check left is Monte Carlo agreement.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = 60_000;
        let draws: Vec<f64> = (0..m)
            .map(|_| sampler.draw(&[1.0], &mut rng).unwrap()[0])
            .collect();
        let v = variance(&draws);
        // The summand law has heavy fourth moment; allow a generous band.
        assert!((v - 1.0).abs() < 0.06, "variance {v}");
        assert!(mean(&draws).abs() < 0.03);
    }

    #[test]
    fn pair_sum_normalization_matches_direct_enumeration() {
        let params = HermiteParams::new(3, 0.8).unwrap();
        let n = 40;
        let mut direct = 0.0;
        for i in 0..n as i64 {
            for j in 0..n as i64 {
                direct += driving_autocovariance((i - j).unsigned_abs() as usize, params)
                    .powi(3);
            }
        }
        direct *= 6.0; // 3!
        assert_relative_eq!(sum_variance(n, params), direct, max_relative = 1e-12);
    }

    #[test]
    fn fourth_cumulant_matches_dense_eigenvalues() {
        let params = HermiteParams::new(2, 0.7).unwrap();
        let n = 48;
        let r = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            driving_autocovariance(i.abs_diff(j), params)
        });
        let eigen = nalgebra::SymmetricEigen::new(r);
        let s2: f64 = eigen.eigenvalues.iter().map(|l| l * l).sum();
        let s4: f64 = eigen.eigenvalues.iter().map(|l| l.powi(4)).sum();
        let expected = 12.0 * s4 / (s2 * s2);
        let fast = fourth_cumulant_order2(n, params).unwrap();
        assert_relative_eq!(fast, expected, max_relative = 1e-9);
    }

    #[test]
    fn variance_scales_like_the_power_law_in_time() {
        // E Z_t^2 should track t^{2H} within the finite-n bias at desk scale.
        let params = HermiteParams::new(2, 0.7).unwrap();
        let config = DmtConfig::new(1 << 12).unwrap();
        let sampler = DmtSampler::new(config, params, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = 4_000;
        let mut sum_half = 0.0;
        for _ in 0..m {
            let v = sampler.draw(&[0.5, 1.0], &mut rng).unwrap();
            sum_half += v[0] * v[0];
        }
        let v_half = sum_half / m as f64;
        let expected = 0.5f64.powf(1.4);
        assert!(
            (v_half - expected).abs() < 0.08 * expected + 0.05,
            "variance at 1/2: {v_half} vs {expected}"
        );
    }

    #[test]
    fn same_seed_same_path() {
        let params = HermiteParams::new(1, 0.7).unwrap();
        let config = DmtConfig::new(256).unwrap();
        let a = sample_dmt(config, params, &[0.25, 0.5, 1.0], 7).unwrap();
        let b = sample_dmt(config, params, &[0.25, 0.5, 1.0], 7).unwrap();
        assert_eq!(a, b);
    }
}

