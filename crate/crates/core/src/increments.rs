//! Selected dyadic increments and their dominant/negligible split.
//!
//! At resolution `N` the scheme keeps every `K`-th dyadic point with
//! `K = floor(2^(N^beta))`, reads increments of length `2^-N` at the kept
//! anchors, and splits each increment's noise integral into the block
//! between consecutive anchors (the dominant part) and everything else.
//! Dominant blocks for distinct anchors are disjoint, which is what makes
//! the dominant parts independent and lets a single-draw sampler stand in
//! for whole-path simulation at resolutions no path sampler could reach.

use crate::chaos::{FactorKernel, PartitionNoise, SecondChaosSpectrum};
use crate::error::{Error, Result};
use crate::grid::Partition;
use crate::process::kernel::{increment_kernel, rescaled_domain, rescaled_increment_kernel};
use crate::process::params::{HermiteParams, SamplePath};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use std::path::Path;

/// Anchor-selection scheme: resolution `N`, spacing exponent `beta`, and
/// cardinality exponent `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicScheme {
    n: u32,
    beta: f64,
    gamma: f64,
}

impl DyadicScheme {
    pub fn new(n: u32, beta: f64, gamma: f64) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::InvalidParams(format!(
                "resolution must be in 1..=63, got {n}"
            )));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParams(format!(
                "spacing exponent must lie in (0, 1), got {beta}"
            )));
        }
        if !(gamma > 0.0 && gamma < beta) {
            return Err(Error::InvalidParams(format!(
                "cardinality exponent must lie in (0, beta = {beta}), got {gamma}"
            )));
        }
        let scheme = Self { n, beta, gamma };
        if scheme.spacing() > 1u64 << n {
            return Err(Error::InvalidParams(format!(
                "spacing {} exceeds the number of dyadic points 2^{n}",
                scheme.spacing()
            )));
        }
        Ok(scheme)
    }

    /// Scheme whose spacing and restricted cardinality hit the requested
    /// values exactly, for experiments parameterized by counts rather than
    /// exponents.
    pub fn with_counts(n: u32, spacing: u64, cardinality: u64) -> Result<Self> {
        if spacing < 2 || cardinality < 1 {
            return Err(Error::InvalidParams(
                "spacing must be at least 2 and cardinality at least 1".into(),
            ));
        }
        let count_of = |e: f64| (n as f64).powf(e).exp2().floor() as u64;
        let beta = invert_count_exponent(n, spacing, &count_of);
        let gamma = invert_count_exponent(n, cardinality, &count_of);
        let scheme = Self::new(n, beta, gamma)?;
        if scheme.spacing() != spacing || scheme.restricted_cardinality() != cardinality {
            return Err(Error::InvalidParams(format!(
                "counts ({spacing}, {cardinality}) are not representable at resolution {n}: \
                 got ({}, {})",
                scheme.spacing(),
                scheme.restricted_cardinality()
            )));
        }
        Ok(scheme)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Increment length `2^-N`.
    pub fn step(&self) -> f64 {
        (self.n as f64).exp2().recip()
    }

    /// Anchor spacing in dyadic steps: `K = floor(2^(N^beta))`.
    pub fn spacing(&self) -> u64 {
        let exponent = (self.n as f64).powf(self.beta);
        exponent.exp2().floor() as u64
    }

    /// Upper bound on the restricted index count: `floor(2^(N^gamma))`.
    pub fn restricted_cardinality(&self) -> u64 {
        let exponent = (self.n as f64).powf(self.gamma);
        exponent.exp2().floor() as u64
    }

    /// Number of anchors that fit in the unit interval.
    pub fn unrestricted_cardinality(&self) -> u64 {
        (1u64 << self.n) / self.spacing()
    }

    /// Anchor position `l * K / 2^N`, exact as a dyadic rational.
    pub fn anchor(&self, l: u64) -> f64 {
        (l * self.spacing()) as f64 * self.step()
    }

    /// Number of anchors actually selected: the full count, capped by the
    /// restricted bound when the restriction applies.
    pub fn cardinality(&self, restricted: bool) -> u64 {
        let full = self.unrestricted_cardinality();
        if restricted {
            full.min(self.restricted_cardinality())
        } else {
            full
        }
    }
}

/// Exponent `e` with `floor(2^(n^e)) == count`, up to the ulp corrections
/// the log/pow round trip needs.  The analytic inverse can land a hair on
/// the wrong side of the floor boundary, so the exponent is stepped by
/// single ulps until the forward map agrees or moves past the target.
fn invert_count_exponent(n: u32, count: u64, count_of: &dyn Fn(f64) -> u64) -> f64 {
    let mut e = ((count as f64).log2()).ln() / (n as f64).ln();
    if !e.is_finite() {
        return e;
    }
    for _ in 0..64 {
        match count_of(e).cmp(&count) {
            std::cmp::Ordering::Less => e = f64::from_bits(e.to_bits() + 1),
            std::cmp::Ordering::Greater => e = f64::from_bits(e.to_bits() - 1),
            std::cmp::Ordering::Equal => break,
        }
    }
    e
}

/// Sorted anchor indices: all that fit when unrestricted, the first
/// `floor(2^(N^gamma))` of them when restricted.
pub fn select_indices(scheme: &DyadicScheme, restricted: bool) -> Result<Vec<u64>> {
    let full = scheme.unrestricted_cardinality();
    if full == 0 {
        return Err(Error::EmptySelection(format!(
            "spacing {} exceeds 2^{}",
            scheme.spacing(),
            scheme.n()
        )));
    }
    let count = scheme.cardinality(restricted);
    if count == 0 {
        return Err(Error::EmptySelection(
            "restricted cardinality is zero".into(),
        ));
    }
    Ok((1..=count).collect())
}

/// Increments read off a sampled path at the selected anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementSet {
    pub scheme: DyadicScheme,
    pub indices: Vec<u64>,
    pub anchors: Vec<f64>,
    pub deltas: Vec<f64>,
}

impl IncrementSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Writes `l,anchor,delta` rows with a header.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(file, "l,anchor,delta")?;
        for ((l, a), d) in self.indices.iter().zip(&self.anchors).zip(&self.deltas) {
            writeln!(file, "{l},{a},{d}")?;
        }
        Ok(())
    }

    pub fn read_csv(path: &Path, scheme: DyadicScheme) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut lines = file.lines();
        match lines.next() {
            Some(Ok(header)) if header.trim() == "l,anchor,delta" => {}
            _ => {
                return Err(Error::Format(
                    "expected header 'l,anchor,delta'".into(),
                ))
            }
        }
        let (mut indices, mut anchors, mut deltas) = (Vec::new(), Vec::new(), Vec::new());
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Format(format!(
                    "row {}: expected 3 fields, got {}",
                    row + 2,
                    fields.len()
                )));
            }
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.trim().parse().map_err(|_| {
                    Error::Format(format!("row {}: bad {what} '{s}'", row + 2))
                })
            };
            indices.push(fields[0].trim().parse().map_err(|_| {
                Error::Format(format!("row {}: bad index '{}'", row + 2, fields[0]))
            })?);
            anchors.push(parse(fields[1], "anchor")?);
            deltas.push(parse(fields[2], "delta")?);
        }
        Ok(Self {
            scheme,
            indices,
            anchors,
            deltas,
        })
    }
}

/// Reads `Z(e + 2^-N) - Z(e)` at every selected anchor.  The path must hold
/// values at each needed time exactly; near-misses are reported as missing
/// rather than interpolated.
pub fn extract_increments(
    path: &SamplePath,
    scheme: &DyadicScheme,
    restricted: bool,
) -> Result<IncrementSet> {
    let indices = select_indices(scheme, restricted)?;
    let step = scheme.step();
    let mut anchors = Vec::with_capacity(indices.len());
    let mut deltas = Vec::with_capacity(indices.len());
    let mut missing = Vec::new();
    for &l in &indices {
        let e = scheme.anchor(l);
        let at = path.value_at(e);
        let after = path.value_at(e + step);
        match (at, after) {
            (Some(a), Some(b)) => {
                anchors.push(e);
                deltas.push(b - a);
            }
            (a, b) => {
                if a.is_none() {
                    missing.push(e);
                }
                if b.is_none() {
                    missing.push(e + step);
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingTimes { missing });
    }
    Ok(IncrementSet {
        scheme: *scheme,
        indices,
        anchors,
        deltas,
    })
}

/// One increment split into its dominant block and the remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposedIncrement {
    pub total: f64,
    pub dominant: f64,
    pub negligible: f64,
}

/// Kernel triple for one anchor: the full increment kernel, its restriction
/// to the dominant block `(e_{l-1} + 2^-N, e_l + 2^-N]`, and the remainder.
/// Build once per anchor, evaluate per noise draw.
pub struct IncrementDecomposer {
    params: HermiteParams,
    full: FactorKernel,
    dominant: FactorKernel,
    rest: FactorKernel,
}

impl IncrementDecomposer {
    pub fn new(
        l: u64,
        scheme: &DyadicScheme,
        params: HermiteParams,
        partition: &Partition,
        nodes_per_cell: usize,
    ) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidParams("anchor index starts at 1".into()));
        }
        let step = scheme.step();
        let e_prev = scheme.anchor(l - 1);
        let e = scheme.anchor(l);
        Self::with_window(
            params,
            partition,
            e,
            e + step,
            e_prev + step,
            nodes_per_cell,
        )
    }

    /// General form: increment over `(u_from, u_to]` with the dominant block
    /// `(block_from, u_to]`.  The anchored constructor and its exactly
    /// rescaled counterpart (anchors at multiples of the spacing, unit
    /// increment length) are both instances.
    pub fn with_window(
        params: HermiteParams,
        partition: &Partition,
        u_from: f64,
        u_to: f64,
        block_from: f64,
        nodes_per_cell: usize,
    ) -> Result<Self> {
        let full = increment_kernel(params, partition, u_from, u_to, nodes_per_cell)?;
        let block = partition.aligned_range(block_from, u_to)?;
        let dominant = full.masked(block);
        let rest = full.difference(&dominant)?;
        Ok(Self {
            params,
            full,
            dominant,
            rest,
        })
    }

    /// Evaluates all three parts against one noise draw.  Each part is
    /// integrated independently; their additivity is a property of the
    /// construction, not an arithmetic shortcut.
    pub fn decompose(&self, noise: &PartitionNoise) -> Result<DecomposedIncrement> {
        let (total, dominant, negligible) = if self.params.q == 2 {
            (
                self.full.centered_square_integral(noise)?,
                self.dominant.centered_square_integral(noise)?,
                self.rest.centered_square_integral(noise)?,
            )
        } else {
            (
                self.full.integral(noise)?,
                self.dominant.integral(noise)?,
                self.rest.integral(noise)?,
            )
        };
        Ok(DecomposedIncrement {
            total,
            dominant,
            negligible,
        })
    }

    pub fn full_kernel(&self) -> &FactorKernel {
        &self.full
    }

    pub fn dominant_kernel(&self) -> &FactorKernel {
        &self.dominant
    }

    pub fn rest_kernel(&self) -> &FactorKernel {
        &self.rest
    }
}

/// One-shot decomposition for a single anchor and noise draw.
pub fn decompose_increment(
    l: u64,
    scheme: &DyadicScheme,
    params: HermiteParams,
    partition: &Partition,
    noise: &PartitionNoise,
    nodes_per_cell: usize,
) -> Result<DecomposedIncrement> {
    IncrementDecomposer::new(l, scheme, params, partition, nodes_per_cell)?.decompose(noise)
}

/// Discretization controls for the single-draw dominant-part law.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DominantConfig {
    /// Cells per unit length in the near field.
    pub subdivisions: usize,
    /// Extent of the uniform near field left of the origin.
    pub near_window: f64,
    /// Geometric growth of far-field cells.
    pub grading_ratio: f64,
    /// Quadrature nodes per cell stretch of the inner time integral.
    pub nodes_per_cell: usize,
}

impl Default for DominantConfig {
    fn default() -> Self {
        Self {
            subdivisions: 4,
            near_window: 8.0,
            grading_ratio: 1.06,
            nodes_per_cell: 24,
        }
    }
}

/// The common dominant-part law at unit scale: every dominant part equals
/// `2^(-NH)` times one fixed law whose kernel lives on `(1 - K, 1]` with the
/// time integral over `(0, 1]`.  This builder returns that kernel.
pub fn dominant_unit_kernel(
    scheme: &DyadicScheme,
    params: HermiteParams,
    config: &DominantConfig,
) -> Result<FactorKernel> {
    let partition = rescaled_domain(
        scheme.spacing() as f64,
        config.subdivisions,
        config.near_window,
        config.grading_ratio,
    )?;
    rescaled_increment_kernel(params, &partition, config.nodes_per_cell)
}

enum LawInner {
    Gaussian { sd: f64 },
    Spectral(SecondChaosSpectrum),
    Generic { kernel: FactorKernel },
}

/// Single-draw form of the unit-scale dominant law: orders 1 and 2 reduce to
/// a Gaussian width and a spectral quadratic form, higher orders integrate
/// fresh noise per draw.
pub struct DominantLaw {
    inner: LawInner,
}

impl DominantLaw {
    pub fn build(
        scheme: &DyadicScheme,
        params: HermiteParams,
        config: &DominantConfig,
    ) -> Result<Self> {
        let kernel = dominant_unit_kernel(scheme, params, config)?;
        let inner = match params.q {
            1 => LawInner::Gaussian {
                sd: kernel.gaussian_sd()?,
            },
            2 => LawInner::Spectral(kernel.spectrum_corrected()?),
            _ => LawInner::Generic { kernel },
        };
        Ok(Self { inner })
    }

    /// One draw at unit scale.
    pub fn draw_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.inner {
            LawInner::Gaussian { sd } => {
                let z: f64 = rng.sample(StandardNormal);
                sd * z
            }
            LawInner::Spectral(spectrum) => spectrum.draw(rng),
            LawInner::Generic { kernel } => {
                let noise = PartitionNoise::generate(kernel.partition(), rng);
                kernel
                    .integral(&noise)
                    .expect("noise generated on the kernel partition")
            }
        }
    }

    /// Exact second moment of the unit-scale law, which prices the combined
    /// truncation and projection deficit against the target value 1.
    pub fn second_moment(&self) -> Result<f64> {
        match &self.inner {
            LawInner::Gaussian { sd } => Ok(sd * sd),
            LawInner::Spectral(spectrum) => Ok(spectrum.second_moment()),
            LawInner::Generic { kernel } => Ok(kernel.second_moment()),
        }
    }

    /// Exact fourth moment: Gaussian closed form at order 1, spectral sum at
    /// order 2.  Higher orders have no closed form here.
    pub fn fourth_moment(&self) -> Result<f64> {
        match &self.inner {
            LawInner::Gaussian { sd } => Ok(3.0 * sd.powi(4)),
            LawInner::Spectral(spectrum) => Ok(spectrum.fourth_moment()),
            LawInner::Generic { .. } => Err(Error::InvalidParams(
                "no closed-form fourth moment for orders above 2".into(),
            )),
        }
    }
}

/// Draws from the i.i.d. dominant-part law at the scheme's own scale
/// (`2^(-NH) X` with `X` the unit-scale law).  Draw `i` depends only on
/// `(seed, i)`, so output is deterministic under any parallel schedule.
pub fn sample_dominant_iid(
    scheme: &DyadicScheme,
    params: HermiteParams,
    config: &DominantConfig,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let law = DominantLaw::build(scheme, params, config)?;
    let scale = (scheme.n() as f64 * params.hurst).exp2().recip();
    let draws: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            scale * law.draw_unit(&mut rng)
        })
        .collect();
    Ok(draws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use approx::assert_relative_eq;

    #[test]
    fn spacing_and_selection_match_hand_arithmetic() {
        let scheme = DyadicScheme::new(16, 0.5, 0.45).unwrap();
        assert_eq!(scheme.spacing(), 16);
        let unrestricted = select_indices(&scheme, false).unwrap();
        assert_eq!(unrestricted.len(), 4096);
        assert_eq!(unrestricted[0], 1);
        assert_eq!(*unrestricted.last().unwrap(), 4096);
        let restricted = select_indices(&scheme, true).unwrap();
        assert_eq!(restricted.len(), 11);
    }

    #[test]
    fn cardinality_stays_inside_the_exponent_bound() {
        for n in 4..=24u32 {
            let scheme = DyadicScheme::new(n, 0.5, 0.45).unwrap();
            let card = select_indices(&scheme, true).unwrap().len() as f64;
            let bound = (n as f64).powf(0.45).exp2();
            assert!(card <= bound, "n = {n}: {card} > {bound}");
            assert!(card >= bound - 1.0, "n = {n}: {card} < {bound} - 1");
        }
    }

    #[test]
    fn anchors_are_exact_dyadic_rationals() {
        let scheme = DyadicScheme::new(16, 0.5, 0.45).unwrap();
        assert_eq!(scheme.anchor(3), 48.0 / 65536.0);
        assert_eq!(scheme.anchor(1), 16.0 / 65536.0);
        let gap = scheme.anchor(2) - scheme.anchor(1);
        for l in 2..20 {
            assert_eq!(scheme.anchor(l + 1) - scheme.anchor(l), gap);
        }
    }

    #[test]
    fn counts_constructor_round_trips() {
        let scheme = DyadicScheme::with_counts(20, 1024, 512).unwrap();
        assert_eq!(scheme.spacing(), 1024);
        assert_eq!(scheme.restricted_cardinality(), 512);
        assert!(scheme.gamma() < scheme.beta());
        assert_eq!(select_indices(&scheme, true).unwrap().len(), 512);
    }

    #[test]
    fn extraction_reads_differences_and_reports_missing_times() {
        let scheme = DyadicScheme::new(4, 0.5, 0.3).unwrap();
        assert_eq!(scheme.spacing(), 4);
        let step = scheme.step();
        let params = HermiteParams::new(1, 0.7).unwrap();
        // Linear path on all dyadic points up to one step past 1, since the
        // last anchor's increment ends there.
        let times: Vec<f64> = (0..=17).map(|j| j as f64 * step).collect();
        let values = times.clone();
        let path = SamplePath::new(
            times.clone(),
            values,
            crate::process::params::SimMethod::GaussianExact,
            params,
            0,
        )
        .unwrap();
        let set = extract_increments(&path, &scheme, false).unwrap();
        assert_eq!(set.len(), 4);
        for d in &set.deltas {
            assert_relative_eq!(*d, step, max_relative = 1e-12);
        }
        // Drop one needed time: the error lists exactly the absent point.
        let sparse_times: Vec<f64> = times.iter().copied().filter(|&t| t != 0.5).collect();
        let sparse_vals = sparse_times.clone();
        let sparse = SamplePath::new(
            sparse_times,
            sparse_vals,
            crate::process::params::SimMethod::GaussianExact,
            params,
            0,
        )
        .unwrap();
        match extract_increments(&sparse, &scheme, false) {
            Err(Error::MissingTimes { missing }) => assert_eq!(missing, vec![0.5]),
            other => panic!("expected missing-times error, got {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip_preserves_rows() {
        let scheme = DyadicScheme::new(6, 0.9, 0.3).unwrap();
        let set = IncrementSet {
            scheme,
            indices: vec![1, 2],
            anchors: vec![0.5, 1.0],
            deltas: vec![-0.25, 0.125],
        };
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("increments.csv");
        set.write_csv(&file).unwrap();
        let back = IncrementSet::read_csv(&file, scheme).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn decomposition_is_additive_and_uncorrelated() {
        let scheme = DyadicScheme::new(6, 0.9, 0.3).unwrap();
        assert_eq!(scheme.spacing(), 32);
        let params = HermiteParams::new(2, 0.7).unwrap();
        let step = scheme.step();
        let partition = Partition::uniform(-0.5, scheme.anchor(1) + step, step).unwrap();
        let decomposer = IncrementDecomposer::new(1, &scheme, params, &partition, 12).unwrap();
        // The dominant and remainder kernels occupy disjoint index blocks,
        // so their covariance vanishes identically.
        let cross = decomposer
            .dominant_kernel()
            .corrected_cross_moment(decomposer.rest_kernel())
            .unwrap();
        assert!(cross.abs() < 1e-12, "cross = {cross}");
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let noise = PartitionNoise::generate(&partition, &mut rng);
            let d = decomposer.decompose(&noise).unwrap();
            assert_relative_eq!(
                d.total,
                d.dominant + d.negligible,
                max_relative = 1e-12,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn decomposition_rejects_misaligned_blocks() {
        let scheme = DyadicScheme::new(6, 0.9, 0.3).unwrap();
        let params = HermiteParams::new(2, 0.7).unwrap();
        // Cell width 3 * 2^-7 never lands on the block edges.
        let partition = Partition::uniform(-0.5, 0.53125, 3.0 / 128.0).unwrap();
        let err = IncrementDecomposer::new(1, &scheme, params, &partition, 8);
        assert!(err.is_err());
    }

    #[test]
    fn dominant_law_second_moment_approaches_unit_scale() {
        // Order 1: the unit-scale second moment is exact linear algebra, so
        // refining the grid must push it toward 1 with only the domain tail
        // missing.
        let scheme = DyadicScheme::new(12, 0.5, 0.45).unwrap();
        let params = HermiteParams::new(1, 0.7).unwrap();
        let coarse = DominantConfig {
            subdivisions: 2,
            ..DominantConfig::default()
        };
        let fine = DominantConfig {
            subdivisions: 32,
            ..DominantConfig::default()
        };
        let m2 = |cfg: &DominantConfig| {
            dominant_unit_kernel(&scheme, params, cfg)
                .unwrap()
                .gaussian_sd()
                .unwrap()
                .powi(2)
        };
        let (lo, hi) = (m2(&coarse), m2(&fine));
        assert!(hi > lo, "refinement should recover mass: {lo} -> {hi}");
        assert!((hi - 1.0).abs() < 0.02, "fine-grid m2 = {hi}");
    }

    #[test]
    fn dominant_draws_match_their_exact_moments() {
        let scheme = DyadicScheme::new(8, 0.9, 0.3).unwrap();
        let params = HermiteParams::new(2, 0.7).unwrap();
        let config = DominantConfig::default();
        let kernel = dominant_unit_kernel(&scheme, params, &config).unwrap();
        let spectrum = kernel.spectrum_corrected().unwrap();
        let exact_m2 = spectrum.second_moment();
        let scale = (scheme.n() as f64 * params.hurst).exp2();
        let draws = sample_dominant_iid(&scheme, params, &config, 40_000, 17).unwrap();
        let scaled: Vec<f64> = draws.iter().map(|d| d * scale).collect();
        let m2 = stats::raw_moment(&scaled, 2);
        let se = stats::se_raw_moment(&scaled, 2);
        assert!(
            (m2 - exact_m2).abs() < 4.0 * se,
            "m2 {m2} vs exact {exact_m2}"
        );
        // Parallel determinism: same seed, same draws.
        let again = sample_dominant_iid(&scheme, params, &config, 40_000, 17).unwrap();
        assert_eq!(draws, again);
    }

    #[test]
    fn dominant_draws_show_no_serial_correlation() {
        let scheme = DyadicScheme::new(8, 0.9, 0.3).unwrap();
        let params = HermiteParams::new(1, 0.7).unwrap();
        let draws =
            sample_dominant_iid(&scheme, params, &DominantConfig::default(), 20_000, 3).unwrap();
        let n = draws.len();
        let mean = stats::mean(&draws);
        let var = stats::variance(&draws);
        let lag1: f64 = draws
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / ((n - 1) as f64 * var);
        assert!(lag1.abs() < 4.0 / (n as f64).sqrt(), "lag-1 = {lag1}");
    }
}
