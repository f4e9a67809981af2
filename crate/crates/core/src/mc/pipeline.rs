//! Sampling pipelines shared by the experiment runners: per-replication
//! parallel maps with counter-derived seeds, the rescaled decomposition
//! setup, full-grid and partial-sum increment sampling, and the limit
//! variance lookup.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Partition;
use crate::increments::{select_indices, DyadicScheme};
use crate::mc::seed::replication_rng;
use crate::process::{DmtConfig, DmtSampler, FgnGenerator, HermiteParams};
use crate::quadvar::{asymptotic_variance, PathDecomposition, VarianceEstimate, VarianceMethod};
use rand_chacha::ChaCha8Rng;

/// Highest full-grid resolution the exact sampler will attempt; the grid
/// holds `2^n + 1` values, so this caps memory per replication at tens of
/// megabytes.
pub const EXACT_LEVEL_CAP: u32 = 22;

/// Maps `f` over replications `0..m` in parallel, each with its own
/// counter-derived generator, collecting in replication order so the result
/// never depends on scheduling.
pub fn par_replications<T, F>(m: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..m)
        .into_par_iter()
        .map(|rep| f(&mut replication_rng(seed, rep as u64)))
        .collect()
}

/// Fallible version of [`par_replications`]; the first error wins.
pub fn try_par_replications<T, F>(m: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    (0..m)
        .into_par_iter()
        .map(|rep| f(&mut replication_rng(seed, rep as u64)))
        .collect()
}

/// Mean squared increment of one replication's raw deltas.
pub fn sn_of_deltas(deltas: &[f64]) -> f64 {
    deltas.iter().map(|d| d * d).sum::<f64>() / deltas.len() as f64
}

/// Geometry of the rescaled noise partition backing chaos-mode runs.
///
/// In rescaled coordinates the selected increments occupy `(0, L*K + 1]`
/// with unit length and spacing `K`; the partition keeps uniform cells of
/// width `1/subdivisions` there and over a small margin to the left, then
/// grades geometrically out to `left_width_spacings` spacings left of the
/// origin, where the kernels are smooth and carry little variance.
#[derive(Debug, Clone, Copy)]
pub struct DecompositionOptions {
    pub left_width_spacings: f64,
    pub subdivisions: usize,
    pub near_window: f64,
    pub grading_ratio: f64,
    pub nodes_per_cell: usize,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        DecompositionOptions {
            left_width_spacings: 7.0,
            subdivisions: 4,
            near_window: 2.0,
            grading_ratio: 1.06,
            nodes_per_cell: 24,
        }
    }
}

/// Builds the rescaled partition and per-anchor decomposition for one
/// scheme.  Restricted selection only: the unrestricted index set at useful
/// resolutions is far too large to decompose anchor by anchor.
pub fn build_rescaled_decomposition(
    scheme: &DyadicScheme,
    params: HermiteParams,
    options: &DecompositionOptions,
) -> Result<(PathDecomposition, Partition)> {
    if options.left_width_spacings < 1.0 {
        return Err(Error::InvalidParams(
            "the rescaled domain needs at least one spacing left of the origin".into(),
        ));
    }
    let spacing = scheme.spacing() as f64;
    let count = scheme.cardinality(true) as f64;
    let right = count * spacing + 1.0;
    let far_left = -options.left_width_spacings * spacing;
    let h = 1.0 / options.subdivisions as f64;
    let near_left = (far_left + h).max(-options.near_window);
    let partition = Partition::graded(far_left, near_left, right, h, options.grading_ratio)?;
    let decomposition = PathDecomposition::new_rescaled(
        scheme,
        params,
        &partition,
        true,
        options.nodes_per_cell,
    )?;
    Ok((decomposition, partition))
}

/// Per-replication raw increments from the exact full-grid sampler
/// (order 1 only).
pub fn sample_deltas_exact(
    scheme: &DyadicScheme,
    params: HermiteParams,
    m: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if params.q != 1 {
        return Err(Error::Mode(format!(
            "exact full-grid sampling covers order 1 only, got order {}",
            params.q
        )));
    }
    let n = scheme.n();
    if n > EXACT_LEVEL_CAP {
        return Err(Error::InvalidParams(format!(
            "resolution {n} exceeds the full-grid cap {EXACT_LEVEL_CAP}"
        )));
    }
    let generator = FgnGenerator::new(1usize << n, params.hurst)?;
    let step = scheme.step();
    let indices = select_indices(scheme, true)?;
    let spacing = scheme.spacing() as usize;
    Ok(par_replications(m, seed, |rng| {
        let values = generator.sample_path(step, params.hurst, rng);
        indices
            .iter()
            .map(|&l| {
                let j = l as usize * spacing;
                values[j + 1] - values[j]
            })
            .collect()
    }))
}

/// Per-replication raw increments from the partial-sum sampler.  The sum
/// resolves times only down to `1/length`, so the scheme step must sit well
/// above that scale.
pub fn sample_deltas_dmt(
    scheme: &DyadicScheme,
    params: HermiteParams,
    length: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if (length as f64) * scheme.step() < 4.0 {
        return Err(Error::InvalidParams(format!(
            "partial sums of length {length} cannot resolve step {}; \
             use at least 4 / step summands",
            scheme.step()
        )));
    }
    let indices = select_indices(scheme, true)?;
    let step = scheme.step();
    let mut times = Vec::with_capacity(2 * indices.len());
    for &l in &indices {
        let e = scheme.anchor(l);
        times.push(e);
        times.push(e + step);
    }
    let max_t = *times.last().expect("selection is never empty");
    let sampler = DmtSampler::new(DmtConfig::new(length)?, params, max_t)?;
    try_par_replications(m, seed, |rng| {
        let values = sampler.draw(&times, rng)?;
        Ok(values.chunks_exact(2).map(|pair| pair[1] - pair[0]).collect())
    })
}

/// Limit variance of the normalized variation by the cheapest sound route:
/// closed form at order 1, accelerated exact partial-sum cumulants at
/// order 2, Monte Carlo above.  Returns the estimate and the method label.
pub fn resolve_sigma(
    params: HermiteParams,
    mc_draws: usize,
    seed: u64,
) -> Result<(VarianceEstimate, &'static str)> {
    match params.q {
        1 => Ok((
            asymptotic_variance(params, VarianceMethod::Analytic, 0, 0)?,
            "analytic",
        )),
        2 => Ok((
            asymptotic_variance(params, VarianceMethod::DmtLimit { n: 1024 }, 0, 0)?,
            "dmt-limit",
        )),
        _ => Ok((
            asymptotic_variance(params, VarianceMethod::McDmt { n: 512 }, mc_draws, seed)?,
            "mc-dmt",
        )),
    }
}
