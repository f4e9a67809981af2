//! Circulant-embedding sampler for stationary Gaussian sequences.
//!
//! Full dyadic grids (2^N points) are far beyond the dense factorization cap,
//! but every covariance used here embeds into a nonnegative circulant, so
//! sampling costs one FFT per draw and is exact up to eigenvalue clamping at
//! roundoff scale.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::process::covariance::fgn_autocovariance;

/// Negative circulant eigenvalues up to this fraction of the largest one are
/// treated as roundoff and clamped to zero; anything worse is an error.
const EIGEN_CLAMP_REL: f64 = 1e-8;

/// Sampler for a stationary centered Gaussian sequence of fixed length with
/// prescribed autocovariance.
pub struct StationaryGaussian {
    n: usize,
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl StationaryGaussian {
    /// Builds the sampler from the autocovariance function evaluated at lags
    /// `0..=n`; the sequence is embedded into a circulant of size `2n`.
    pub fn new(n: usize, autocov: impl Fn(usize) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(
                "stationary sampler needs at least 2 points".into(),
            ));
        }
        let m = 2 * n;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| Complex::new(autocov(j.min(m - j)), 0.0))
            .collect();
        fft.process(&mut row);
        let max_eigen = row
            .iter()
            .map(|c| c.re)
            .fold(f64::MIN_POSITIVE, f64::max);
        let mut scale = Vec::with_capacity(m);
        for (k, c) in row.iter().enumerate() {
            let lambda = c.re;
            if lambda < -EIGEN_CLAMP_REL * max_eigen {
                return Err(Error::Spectrum(format!(
                    "circulant eigenvalue {lambda:.3e} at index {k} is negative beyond \
                     roundoff; this autocovariance does not embed at size {m}"
                )));
            }
            scale.push((lambda.max(0.0) / m as f64).sqrt());
        }
        Ok(StationaryGaussian { n, scale, fft })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// One draw of the length-`n` sequence.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let m = 2 * self.n;
        let half = self.n;
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        let z0: f64 = StandardNormal.sample(rng);
        buf[0] = Complex::new(self.scale[0] * z0, 0.0);
        let zh: f64 = StandardNormal.sample(rng);
        buf[half] = Complex::new(self.scale[half] * zh, 0.0);
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for k in 1..half {
            let u: f64 = StandardNormal.sample(rng);
            let v: f64 = StandardNormal.sample(rng);
            let c = Complex::new(u * inv_sqrt2, v * inv_sqrt2);
            buf[k] = self.scale[k] * c;
            buf[m - k] = self.scale[m - k] * c.conj();
        }
        self.fft.process(&mut buf);
        buf[..self.n].iter().map(|c| c.re).collect()
    }
}

/// Unit-spacing fractional Gaussian noise of a given length.
pub struct FgnGenerator {
    inner: StationaryGaussian,
}

impl FgnGenerator {
    pub fn new(n: usize, hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::InvalidParams(format!(
                "Hurst index must lie in (0, 1) for noise synthesis, got {hurst}"
            )));
        }
        let inner = StationaryGaussian::new(n, |k| fgn_autocovariance(k as i64, hurst))?;
        Ok(FgnGenerator { inner })
    }

    /// One draw of `n` unit-spaced increments.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.inner.sample(rng)
    }

    /// Cumulative path on the grid `{0, step, 2 step, ...}` with `n + 1`
    /// values starting at 0; increments are scaled by `step^H`.
    pub fn sample_path<R: Rng + ?Sized>(&self, step: f64, hurst: f64, rng: &mut R) -> Vec<f64> {
        let scale = step.powf(hurst);
        let mut path = Vec::with_capacity(self.inner.len() + 1);
        path.push(0.0);
        let mut acc = 0.0;
        for inc in self.sample(rng) {
            acc += scale * inc;
            path.push(acc);
        }
        path
    }
}
