//! Dense exact Gaussian sampling at arbitrary point sets (order 1 only).

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::process::covariance::covariance;
use crate::process::params::{HermiteParams, SamplePath, SimMethod};

/// Dense factorizations stay fast and well conditioned up to this size; the
/// statistics in this crate only ever need a handful of anchor points.
pub const MAX_EXACT_POINTS: usize = 4096;

/// Joint Gaussian sampler over a fixed point set with the exact
/// finite-dimensional law.  The Cholesky factor is computed once and reused
/// across draws.
#[derive(Debug, Clone)]
pub struct GaussianExactSampler {
    points: Vec<f64>,
    hurst: f64,
    zero_leading: bool,
    factor: DMatrix<f64>,
}

impl GaussianExactSampler {
    pub fn new(points: &[f64], hurst: f64) -> Result<Self> {
        let params = HermiteParams::new(1, hurst)?;
        if points.is_empty() {
            return Err(Error::EmptySelection("no sample points given".into()));
        }
        if points[0] < 0.0 {
            return Err(Error::InvalidParams("points must be nonnegative".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "points must be strictly increasing".into(),
            ));
        }
        if points.len() > MAX_EXACT_POINTS {
            return Err(Error::InvalidParams(format!(
                "{} points exceed the dense-factorization cap {MAX_EXACT_POINTS}",
                points.len()
            )));
        }
        let zero_leading = points[0] == 0.0;
        let positive = &points[if zero_leading { 1 } else { 0 }..];
        let n = positive.len();
        let cov = DMatrix::from_fn(n, n, |i, j| covariance(positive[i], positive[j], hurst));
        let factor = cholesky_with_jitter(cov)?;
        let _ = params;
        Ok(GaussianExactSampler {
            points: points.to_vec(),
            hurst,
            zero_leading,
            factor,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// One draw with an external generator; values are in point order, with a
    /// deterministic 0 at time 0 when present.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.factor.nrows();
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let mut values = Vec::with_capacity(self.points.len());
        if self.zero_leading {
            values.push(0.0);
        }
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += self.factor[(i, j)] * z[j];
            }
            values.push(acc);
        }
        values
    }

    pub fn sample(&self, seed: u64) -> Result<SamplePath> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = self.draw(&mut rng);
        SamplePath::new(
            self.points.clone(),
            values,
            SimMethod::GaussianExact,
            HermiteParams::new(1, self.hurst)?,
            seed,
        )
    }
}

/// Exact joint Gaussian path at the given points (order 1 only).
pub fn sample_gaussian_exact(points: &[f64], hurst: f64, seed: u64) -> Result<SamplePath> {
    GaussianExactSampler::new(points, hurst)?.sample(seed)
}

/// Cholesky factorization with escalating diagonal jitter.  The covariance is
/// positive definite in exact arithmetic; jitter only papers over roundoff
/// from nearly coincident points.
fn cholesky_with_jitter(cov: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let scale = cov.diagonal().amax().max(f64::MIN_POSITIVE);
    if let Some(chol) = cov.clone().cholesky() {
        return Ok(chol.unpack());
    }
    let mut jitter = 1e-12;
    while jitter <= 1e-6 {
        let mut bumped = cov.clone();
        for i in 0..bumped.nrows() {
            bumped[(i, i)] += jitter * scale;
        }
        if let Some(chol) = bumped.cholesky() {
            return Ok(chol.unpack());
        }
        jitter *= 10.0;
    }
    Err(Error::NotPositiveDefinite {
        max_jitter: 1e-6 * scale,
    })
}
