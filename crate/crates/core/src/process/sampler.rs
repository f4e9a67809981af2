//! Path sampling through the projected kernel.
//!
//! One Gaussian noise vector per replication drives every requested time
//! point, so sampled paths have consistent increments: the value at `t` is
//! the accumulated sum of increment-kernel integrals over consecutive time
//! windows against the same noise.  Orders 1 and 2 evaluate their exact
//! (order 1) and diagonal-corrected (order 2) forms; higher orders use the
//! off-diagonal multiple integral.
//!
//! Both the domain truncation and the cell projection bias the law low; the
//! exact second-moment accessors quantify the combined deficit so callers
//! and tests can budget for it instead of guessing.

use crate::chaos::{FactorKernel, PartitionNoise};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::process::kernel::{increment_kernel, DEFAULT_NODES_PER_CELL};
use crate::process::params::{HermiteParams, SamplePath, SimMethod};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Chaos-projection sampler for a fixed set of time points.
pub struct ChaosSampler {
    params: HermiteParams,
    t_points: Vec<f64>,
    kernels: Vec<FactorKernel>,
    partition: crate::grid::Partition,
    nodes_per_cell: usize,
}

impl ChaosSampler {
    /// Builds increment kernels between consecutive time points on the given
    /// noise grid.  The grid must reach left of zero (that is the domain
    /// truncation) and cover the largest time point; time points must be
    /// nonnegative, strictly increasing, and separated by at least one cell
    /// width, otherwise neighboring points would be projected onto the same
    /// cells and their increment would degenerate.
    pub fn new(
        grid: &Grid,
        params: HermiteParams,
        t_points: &[f64],
        nodes_per_cell: usize,
    ) -> Result<Self> {
        params.validate()?;
        if t_points.is_empty() {
            return Err(Error::InvalidParams("no time points requested".into()));
        }
        if t_points[0] < 0.0 {
            return Err(Error::InvalidParams("time points must be nonnegative".into()));
        }
        if t_points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams(
                "time points must be strictly increasing".into(),
            ));
        }
        let max_t = *t_points.last().expect("nonempty");
        if grid.left() >= 0.0 {
            return Err(Error::GridMismatch(format!(
                "grid must extend left of 0 to truncate the noise domain, starts at {}",
                grid.left()
            )));
        }
        if grid.right() + 1e-12 < max_t {
            return Err(Error::GridMismatch(format!(
                "grid ends at {} but time points reach {max_t}",
                grid.right()
            )));
        }
        let h = grid.h();
        let mut prev = 0.0;
        for &t in t_points {
            if t > 0.0 && t - prev < h * (1.0 - 1e-9) {
                return Err(Error::GridMismatch(format!(
                    "grid cell width {h} is too coarse for the step from {prev} to {t}"
                )));
            }
            if t > 0.0 {
                prev = t;
            }
        }
        let partition = grid.to_partition();
        let mut kernels = Vec::new();
        let mut from = 0.0;
        for &t in t_points {
            if t <= 0.0 {
                continue;
            }
            kernels.push(increment_kernel(params, &partition, from, t, nodes_per_cell)?);
            from = t;
        }
        Ok(Self {
            params,
            t_points: t_points.to_vec(),
            kernels,
            partition,
            nodes_per_cell,
        })
    }

    pub fn t_points(&self) -> &[f64] {
        &self.t_points
    }

    /// One path: a fresh noise vector, then accumulated increment integrals.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let noise = PartitionNoise::generate(&self.partition, rng);
        self.evaluate(&noise)
    }

    /// Path values for an externally supplied noise vector.
    pub fn evaluate(&self, noise: &PartitionNoise) -> Result<Vec<f64>> {
        let mut values = Vec::with_capacity(self.t_points.len());
        let mut acc = 0.0;
        let mut next_kernel = self.kernels.iter();
        for &t in &self.t_points {
            if t > 0.0 {
                let kernel = next_kernel.next().expect("one kernel per positive time");
                acc += match self.params.q {
                    2 => kernel.centered_square_integral(noise)?,
                    _ => kernel.integral(noise)?,
                };
            }
            values.push(acc);
        }
        Ok(values)
    }

    /// Exact second moment of the sampled value at the final time point:
    /// order 1 from the Gaussian standard deviation, order 2 from the
    /// diagonal-corrected trace, higher orders from the off-diagonal pairing
    /// sum.  This is the projected-and-truncated variance, not the ideal
    /// `t^{2H}`; their gap is the sampler's bias.
    pub fn final_second_moment(&self) -> Result<f64> {
        let max_t = *self.t_points.last().expect("nonempty");
        let full = increment_kernel(self.params, &self.partition, 0.0, max_t, self.nodes_per_cell)?;
        match self.params.q {
            1 => Ok(full.gaussian_sd()?.powi(2)),
            2 => full.corrected_second_moment(),
            _ => Ok(full.second_moment()),
        }
    }

    /// Collects a full path object with provenance.
    pub fn sample(&self, seed: u64) -> Result<SamplePath> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = self.draw(&mut rng)?;
        SamplePath::new(
            self.t_points.clone(),
            values,
            SimMethod::Chaos,
            self.params,
            seed,
        )
    }
}

/// One-call wrapper matching the sampler construction defaults.
pub fn sample_chaos(
    grid: &Grid,
    params: HermiteParams,
    t_points: &[f64],
    seed: u64,
) -> Result<SamplePath> {
    ChaosSampler::new(grid, params, t_points, DEFAULT_NODES_PER_CELL)?.sample(seed)
}
