//! Modified quadratic variation, its three-part split, and the Hurst
//! estimator built on it.
//!
//! All statistics here are plain algebra over an increment set: `S_N` is the
//! mean of squared increments, `U_N = 2^{2HN} S_N - 1` its centered and
//! rescaled form, `V_N = sqrt(|L|) U_N` the normalized version whose law
//! stabilizes, and the estimator inverts the expected scaling of `S_N`.
//! The split of `V_N` follows the dominant/negligible decomposition of each
//! increment; its bookkeeping keeps the three parts exactly additive while
//! reporting the deterministic discretization defect separately instead of
//! hiding it inside a centering.

use crate::chaos::{FactorKernel, PartitionNoise};
use crate::error::{Error, Result};
use crate::grid::Partition;
use crate::increments::{
    select_indices, DecomposedIncrement, DominantConfig, DyadicScheme, IncrementDecomposer,
    IncrementSet,
};
use crate::process::{
    fourth_cumulant_order2, rescaled_domain, rescaled_increment_kernel, DmtConfig, DmtSampler,
    HermiteParams,
};
use crate::stats;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Mean of squared increments.
pub fn compute_sn(incs: &IncrementSet) -> Result<f64> {
    if incs.is_empty() {
        return Err(Error::EmptySelection("no increments to average".into()));
    }
    Ok(incs.deltas.iter().map(|d| d * d).sum::<f64>() / incs.len() as f64)
}

/// Centered rescaled variation `U_N = 2^{2HN} S_N - 1`.
pub fn compute_un(s_n: f64, hurst: f64, n: u32) -> f64 {
    (2.0 * hurst * n as f64).exp2() * s_n - 1.0
}

/// Normalized variation `V_N = sqrt(|L|) U_N`.
pub fn compute_vn(incs: &IncrementSet, hurst: f64) -> Result<f64> {
    let s_n = compute_sn(incs)?;
    let u_n = compute_un(s_n, hurst, incs.scheme.n());
    Ok((incs.len() as f64).sqrt() * u_n)
}

/// Estimator inverting `E S_N = 2^{-2HN}`.
pub fn estimate_hurst(s_n: f64, n: u32) -> Result<f64> {
    if !(s_n > 0.0) {
        return Err(Error::NonPositiveStatistic { value: s_n });
    }
    Ok(-s_n.log2() / (2.0 * n as f64))
}

/// Normalized estimator deviation `2N ln(2) sqrt(|L|) (H - H_hat)`.
pub fn studentized_deviation(h_hat: f64, h_true: f64, scheme: &DyadicScheme) -> f64 {
    let card = scheme.cardinality(true) as f64;
    2.0 * scheme.n() as f64 * std::f64::consts::LN_2 * card.sqrt() * (h_true - h_hat)
}

/// The three-part split of `V_N` plus the bookkeeping that makes it exact.
///
/// `v1` and `v2` are the dominant and remainder squared terms, each centered
/// by its exact expectation under the discretized kernels.  `v3` carries the
/// cross term and, separately identified, the deterministic defect
/// `sqrt(|L|) (2^{2HN} mean E[increment^2] - 1)` that would vanish for the
/// continuum kernels but not for their projections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VnParts {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    /// Pure cross-term portion of `v3`.
    pub cross: f64,
    /// Deterministic centering defect portion of `v3`.
    pub centering_defect: f64,
}

/// Full quadratic-variation summary for one path or noise draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadVarResult {
    pub scheme: DyadicScheme,
    pub cardinality: usize,
    pub s_n: f64,
    pub u_n: f64,
    pub v_n: f64,
    pub parts: Option<VnParts>,
}

/// Builds the summary from an increment set, attaching parts when supplied.
pub fn quadvar_result(
    incs: &IncrementSet,
    hurst: f64,
    parts: Option<VnParts>,
) -> Result<QuadVarResult> {
    let s_n = compute_sn(incs)?;
    let u_n = compute_un(s_n, hurst, incs.scheme.n());
    Ok(QuadVarResult {
        scheme: incs.scheme,
        cardinality: incs.len(),
        s_n,
        u_n,
        v_n: (incs.len() as f64).sqrt() * u_n,
        parts,
    })
}

/// Per-anchor kernel machinery for the decomposition of `V_N`: one
/// decomposer and one pair of exact second moments per selected anchor.
///
/// Two constructions are offered.  [`PathDecomposition::new`] works on the
/// original time axis; [`PathDecomposition::new_rescaled`] works on the
/// self-similar rescaling (time and noise blown up by `2^N`, values by
/// `2^NH`), under which the increment vector has exactly the same law while
/// anchors sit at integer multiples of the spacing and increments have unit
/// length.  The rescaled form keeps partitions small at resolutions where
/// the original axis would need millions of cells.
pub struct PathDecomposition {
    scheme: DyadicScheme,
    params: HermiteParams,
    decomposers: Vec<IncrementDecomposer>,
    dominant_m2: Vec<f64>,
    rest_m2: Vec<f64>,
    /// Multiplies squared increments in the variation: `2^2HN` on the
    /// original axis, 1 in rescaled coordinates.
    scale: f64,
}

fn exact_second_moment(kernel: &FactorKernel, q: usize) -> Result<f64> {
    match q {
        1 => Ok(kernel.gaussian_sd()?.powi(2)),
        2 => kernel.corrected_second_moment(),
        _ => Ok(kernel.second_moment()),
    }
}

impl PathDecomposition {
    fn build(
        scheme: &DyadicScheme,
        params: HermiteParams,
        partition: &Partition,
        restricted: bool,
        nodes_per_cell: usize,
        rescaled: bool,
    ) -> Result<Self> {
        params.validate()?;
        let indices = select_indices(scheme, restricted)?;
        let mut decomposers = Vec::with_capacity(indices.len());
        let mut dominant_m2 = Vec::with_capacity(indices.len());
        let mut rest_m2 = Vec::with_capacity(indices.len());
        for &l in &indices {
            let d = if rescaled {
                let spacing = scheme.spacing() as f64;
                let e = l as f64 * spacing;
                IncrementDecomposer::with_window(
                    params,
                    partition,
                    e,
                    e + 1.0,
                    e - spacing + 1.0,
                    nodes_per_cell,
                )?
            } else {
                IncrementDecomposer::new(l, scheme, params, partition, nodes_per_cell)?
            };
            dominant_m2.push(exact_second_moment(d.dominant_kernel(), params.q)?);
            rest_m2.push(exact_second_moment(d.rest_kernel(), params.q)?);
            decomposers.push(d);
        }
        let scale = if rescaled {
            1.0
        } else {
            (2.0 * params.hurst * scheme.n() as f64).exp2()
        };
        Ok(Self {
            scheme: *scheme,
            params,
            decomposers,
            dominant_m2,
            rest_m2,
            scale,
        })
    }

    pub fn new(
        scheme: &DyadicScheme,
        params: HermiteParams,
        partition: &Partition,
        restricted: bool,
        nodes_per_cell: usize,
    ) -> Result<Self> {
        Self::build(scheme, params, partition, restricted, nodes_per_cell, false)
    }

    /// Decomposition in rescaled coordinates: the partition lives on the
    /// blown-up noise axis, anchor `l` sits at `l * spacing`, and increments
    /// have unit length.  Statistics from [`Self::vn_parts`] and
    /// [`Self::vn_from_decomposed`] equal the original-axis ones in law.
    pub fn new_rescaled(
        scheme: &DyadicScheme,
        params: HermiteParams,
        partition: &Partition,
        restricted: bool,
        nodes_per_cell: usize,
    ) -> Result<Self> {
        Self::build(scheme, params, partition, restricted, nodes_per_cell, true)
    }

    pub fn len(&self) -> usize {
        self.decomposers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decomposers.is_empty()
    }

    pub fn scheme(&self) -> &DyadicScheme {
        &self.scheme
    }

    pub fn params(&self) -> HermiteParams {
        self.params
    }

    /// Exact per-anchor second moments of the dominant parts.
    pub fn dominant_m2(&self) -> &[f64] {
        &self.dominant_m2
    }

    /// Exact per-anchor second moments of the remainders.
    pub fn rest_m2(&self) -> &[f64] {
        &self.rest_m2
    }

    /// Splits every selected increment against one noise draw.
    pub fn evaluate(&self, noise: &PartitionNoise) -> Result<Vec<DecomposedIncrement>> {
        self.decomposers.iter().map(|d| d.decompose(noise)).collect()
    }

    /// The three-part split of `V_N` for one evaluated draw.
    pub fn vn_parts(&self, decomposed: &[DecomposedIncrement]) -> Result<VnParts> {
        if decomposed.len() != self.decomposers.len() {
            return Err(Error::InvalidParams(format!(
                "expected {} decomposed increments, got {}",
                self.decomposers.len(),
                decomposed.len()
            )));
        }
        let root = (decomposed.len() as f64).sqrt();
        let scale = self.scale;
        let mut v1 = 0.0;
        let mut v2 = 0.0;
        let mut cross = 0.0;
        let mut defect = 0.0;
        for (d, (&m_dom, &m_rest)) in decomposed
            .iter()
            .zip(self.dominant_m2.iter().zip(&self.rest_m2))
        {
            v1 += scale * (d.dominant * d.dominant - m_dom);
            v2 += scale * (d.negligible * d.negligible - m_rest);
            cross += scale * 2.0 * d.dominant * d.negligible;
            defect += scale * (m_dom + m_rest) - 1.0;
        }
        v1 /= root;
        v2 /= root;
        cross /= root;
        defect /= root;
        Ok(VnParts {
            v1,
            v2,
            v3: cross + defect,
            cross,
            centering_defect: defect,
        })
    }

    /// `V_N` recomputed from the same decomposed values, for exact
    /// comparisons against the sum of parts.
    pub fn vn_from_decomposed(&self, decomposed: &[DecomposedIncrement]) -> f64 {
        let root = (decomposed.len() as f64).sqrt();
        decomposed
            .iter()
            .map(|d| self.scale * d.total * d.total - 1.0)
            .sum::<f64>()
            / root
    }
}

/// How to obtain the limit variance `E|Z_1|^4 - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceMethod {
    /// Closed form, order 1 only.
    Analytic,
    /// Monte Carlo over partial-sum approximations of `Z_1` with the given
    /// sequence length.
    McDmt { n: usize },
    /// Deterministic Aitken extrapolation of the exact partial-sum fourth
    /// cumulant evaluated at lengths `n`, `2n`, `4n` (order 2 only).  The
    /// cumulant converges like a power of `n`, so accelerating the last
    /// three terms removes most of the finite-length bias.
    DmtLimit { n: usize },
    /// Monte Carlo over the truncated-domain kernel law of `Z_1` with the
    /// given domain width.
    McChaos { k_width: u64 },
}

/// Limit variance estimate with its Monte Carlo error when applicable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Limit variance of the normalized variation: exactly 2 for order 1, a
/// Monte Carlo fourth-moment estimate otherwise.
pub fn asymptotic_variance(
    params: HermiteParams,
    method: VarianceMethod,
    draws: usize,
    seed: u64,
) -> Result<VarianceEstimate> {
    params.validate()?;
    match method {
        VarianceMethod::Analytic => {
            if params.q != 1 {
                return Err(Error::InvalidParams(format!(
                    "no closed-form limit variance for order {}; use a Monte Carlo method",
                    params.q
                )));
            }
            Ok(VarianceEstimate {
                value: 2.0,
                std_error: None,
            })
        }
        VarianceMethod::DmtLimit { n } => {
            let k_n = fourth_cumulant_order2(n, params)?;
            let k_2n = fourth_cumulant_order2(2 * n, params)?;
            let k_4n = fourth_cumulant_order2(4 * n, params)?;
            let d1 = k_2n - k_n;
            let d2 = k_4n - k_2n;
            let rho = d2 / d1;
            if !(rho > 0.0 && rho < 1.0) {
                return Err(Error::Quadrature(format!(
                    "fourth-cumulant sequence at lengths {n}, {}, {} is not \
                     geometrically converging (ratio {rho}); increase n",
                    2 * n,
                    4 * n
                )));
            }
            let limit = k_4n + d2 * rho / (1.0 - rho);
            Ok(VarianceEstimate {
                value: 2.0 + limit,
                std_error: None,
            })
        }
        VarianceMethod::McDmt { n } => {
            if draws == 0 {
                return Err(Error::InvalidParams("need at least one draw".into()));
            }
            let config = DmtConfig::new(n)?;
            let sampler = DmtSampler::new(config, params, 1.0)?;
            let fourths: Vec<f64> = (0..draws)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64);
                    let z = sampler
                        .draw(&[1.0], &mut rng)
                        .expect("t = 1 is within the configured horizon")[0];
                    z.powi(4)
                })
                .collect();
            Ok(VarianceEstimate {
                value: stats::mean(&fourths) - 1.0,
                std_error: Some(stats::se_mean(&fourths)),
            })
        }
        VarianceMethod::McChaos { k_width } => {
            if draws == 0 {
                return Err(Error::InvalidParams("need at least one draw".into()));
            }
            let config = DominantConfig::default();
            let partition = rescaled_domain(
                k_width as f64,
                config.subdivisions,
                config.near_window,
                config.grading_ratio,
            )?;
            let kernel = rescaled_increment_kernel(params, &partition, config.nodes_per_cell)?;
            let spectrum = if params.q == 2 {
                Some(kernel.spectrum_corrected()?)
            } else {
                None
            };
            let fourths: Vec<f64> = (0..draws)
                .into_par_iter()
                .map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64);
                    let z = match &spectrum {
                        Some(s) => s.draw(&mut rng),
                        None => {
                            let noise = PartitionNoise::generate(kernel.partition(), &mut rng);
                            kernel
                                .integral(&noise)
                                .expect("noise generated on the kernel partition")
                        }
                    };
                    z.powi(4)
                })
                .collect();
            Ok(VarianceEstimate {
                value: stats::mean(&fourths) - 1.0,
                std_error: Some(stats::se_mean(&fourths)),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::dmt::fourth_cumulant_order2;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn toy_set(deltas: Vec<f64>, scheme: DyadicScheme) -> IncrementSet {
        let indices: Vec<u64> = (1..=deltas.len() as u64).collect();
        let anchors = indices.iter().map(|&l| scheme.anchor(l)).collect();
        IncrementSet {
            scheme,
            indices,
            anchors,
            deltas,
        }
    }

    #[test]
    fn sn_is_the_mean_square() {
        let scheme = DyadicScheme::new(12, 0.5, 0.45).unwrap();
        let set = toy_set(vec![0.25; 7], scheme);
        assert_relative_eq!(compute_sn(&set).unwrap(), 0.0625);
        let pm = toy_set(vec![1.0, -1.0], scheme);
        assert_relative_eq!(compute_sn(&pm).unwrap(), 1.0);
        let empty = toy_set(vec![], scheme);
        assert!(compute_sn(&empty).is_err());
    }

    #[test]
    fn centered_input_gives_zero_variation() {
        let scheme = DyadicScheme::new(12, 0.5, 0.45).unwrap();
        let hurst = 0.7;
        let d = (-(2.0_f64 * hurst * 12.0) / 2.0).exp2();
        let set = toy_set(vec![d; 11], scheme);
        let v_n = compute_vn(&set, hurst).unwrap();
        assert!(v_n.abs() < 1e-10, "v_n = {v_n}");
    }

    #[test]
    fn scaling_deltas_scales_the_uncentered_statistic_quadratically() {
        let scheme = DyadicScheme::new(10, 0.5, 0.45).unwrap();
        let hurst = 0.8;
        let base = toy_set(vec![1e-3, -2e-3, 5e-4], scheme);
        let scaled = toy_set(vec![3e-3, -6e-3, 1.5e-3], scheme);
        let lift = |set: &IncrementSet| {
            compute_vn(set, hurst).unwrap() / (set.len() as f64).sqrt() + 1.0
        };
        assert_relative_eq!(lift(&scaled), 9.0 * lift(&base), max_relative = 1e-12);
    }

    #[test]
    fn result_identities_hold_to_machine_precision() {
        let scheme = DyadicScheme::new(14, 0.5, 0.45).unwrap();
        let set = toy_set(vec![1e-3, 2e-3, -1e-3, 5e-4, 8e-4], scheme);
        let r = quadvar_result(&set, 0.7, None).unwrap();
        assert_relative_eq!(
            r.u_n,
            (2.0f64 * 0.7 * 14.0).exp2() * r.s_n - 1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            r.v_n,
            (r.cardinality as f64).sqrt() * r.u_n,
            max_relative = 1e-12
        );
    }

    #[test]
    fn estimator_inverts_the_expected_scaling() {
        assert_relative_eq!(
            estimate_hurst((-(2.0_f64 * 0.7 * 12.0)).exp2(), 12).unwrap(),
            0.7,
            max_relative = 1e-14
        );
        assert_eq!(estimate_hurst(1.0, 9).unwrap(), 0.0);
        assert!(matches!(
            estimate_hurst(0.0, 12),
            Err(Error::NonPositiveStatistic { .. })
        ));
        assert!(estimate_hurst(-0.5, 12).is_err());
    }

    #[test]
    fn studentized_deviation_matches_the_log_identity() {
        let scheme = DyadicScheme::new(16, 0.5, 0.45).unwrap();
        let card = scheme.cardinality(true) as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let u_n: f64 = 0.99 * (rng.sample::<f64, _>(StandardNormal) * 0.2).clamp(-0.5, 0.5);
            let s_n = (1.0 + u_n) * (-(2.0_f64 * 0.7 * 16.0)).exp2();
            let h_hat = estimate_hurst(s_n, 16).unwrap();
            let direct = studentized_deviation(h_hat, 0.7, &scheme);
            let v_n = card.sqrt() * u_n;
            let via_log = v_n + card.sqrt() * ((1.0 + u_n).ln() - u_n);
            assert_relative_eq!(direct, via_log, max_relative = 1e-10, epsilon = 1e-10);
        }
        assert_eq!(studentized_deviation(0.7, 0.7, &scheme), 0.0);
    }

    #[test]
    fn log_remainder_inequality_holds_on_the_half_interval() {
        for i in 0..=1000 {
            let x = -0.5 + i as f64 / 1000.0;
            assert!(
                ((1.0 + x).ln() - x).abs() <= x * x,
                "violated at x = {x}"
            );
        }
    }

    #[test]
    fn parts_sum_to_the_variation_and_center_the_dominant_term() {
        let scheme = DyadicScheme::new(6, 0.9, 0.3).unwrap();
        let params = HermiteParams::new(2, 0.7).unwrap();
        let step = scheme.step();
        let restricted_count = scheme.cardinality(true);
        assert_eq!(restricted_count, 2);
        let right = scheme.anchor(restricted_count) + step;
        let partition = Partition::uniform(-0.25, right, step).unwrap();
        let deco = PathDecomposition::new(&scheme, params, &partition, true, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut v1_sum = 0.0;
        let m = 2000;
        for _ in 0..m {
            let noise = PartitionNoise::generate(&partition, &mut rng);
            let split = deco.evaluate(&noise).unwrap();
            let parts = deco.vn_parts(&split).unwrap();
            let v_n = deco.vn_from_decomposed(&split);
            assert_relative_eq!(
                parts.v1 + parts.v2 + parts.v3,
                v_n,
                max_relative = 1e-10,
                epsilon = 1e-12
            );
            assert_relative_eq!(
                parts.v3,
                parts.cross + parts.centering_defect,
                max_relative = 1e-12
            );
            v1_sum += parts.v1;
        }
        // Wick centering: the dominant part's mean is zero up to Monte Carlo
        // error (its variance is O(1) by construction).
        let v1_mean = v1_sum / m as f64;
        assert!(v1_mean.abs() < 4.0 * 2.0 / (m as f64).sqrt(), "mean = {v1_mean}");
    }

    #[test]
    fn rescaled_decomposition_reproduces_original_axis_moments() {
        let scheme = DyadicScheme::new(6, 0.9, 0.3).unwrap();
        let step = scheme.step();
        let right = scheme.anchor(scheme.cardinality(true)) + step;
        let original = Partition::uniform(-0.25, right, step).unwrap();
        let blown_up = Partition::uniform(-16.0, right / step, 1.0).unwrap();
        for q in [1usize, 2] {
            let params = HermiteParams::new(q, 0.7).unwrap();
            let real = PathDecomposition::new(&scheme, params, &original, true, 12).unwrap();
            let resc =
                PathDecomposition::new_rescaled(&scheme, params, &blown_up, true, 12).unwrap();
            let lift = (2.0 * 0.7 * 6.0_f64).exp2();
            for (a, b) in real.dominant_m2().iter().zip(resc.dominant_m2()) {
                assert_relative_eq!(a * lift, *b, max_relative = 1e-9);
            }
            for (a, b) in real.rest_m2().iter().zip(resc.rest_m2()) {
                assert_relative_eq!(a * lift, *b, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn rescaled_parts_stay_exactly_additive() {
        let scheme = DyadicScheme::new(8, 0.9, 0.3).unwrap();
        let params = HermiteParams::new(2, 0.7).unwrap();
        let spacing = scheme.spacing() as f64;
        let count = scheme.cardinality(true) as f64;
        let partition = Partition::uniform(-32.0, count * spacing + 1.0, 0.25).unwrap();
        let deco =
            PathDecomposition::new_rescaled(&scheme, params, &partition, true, 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..50 {
            let noise = PartitionNoise::generate(&partition, &mut rng);
            let split = deco.evaluate(&noise).unwrap();
            let parts = deco.vn_parts(&split).unwrap();
            assert_relative_eq!(
                parts.v1 + parts.v2 + parts.v3,
                deco.vn_from_decomposed(&split),
                max_relative = 1e-10,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn analytic_variance_is_two_for_order_one_only() {
        let p1 = HermiteParams::new(1, 0.62).unwrap();
        let est = asymptotic_variance(p1, VarianceMethod::Analytic, 0, 0).unwrap();
        assert_eq!(est.value, 2.0);
        assert!(est.std_error.is_none());
        let p2 = HermiteParams::new(2, 0.7).unwrap();
        assert!(asymptotic_variance(p2, VarianceMethod::Analytic, 0, 0).is_err());
    }

    #[test]
    fn dmt_variance_estimate_matches_its_exact_finite_counterpart() {
        let params = HermiteParams::new(2, 0.7).unwrap();
        let n = 1 << 10;
        let est = asymptotic_variance(params, VarianceMethod::McDmt { n }, 20_000, 5).unwrap();
        // The same finite-sequence law has an exactly computable fourth
        // cumulant, so the Monte Carlo estimate must match 2 + kappa4.
        let exact = 2.0 + fourth_cumulant_order2(n, params).unwrap();
        let se = est.std_error.unwrap();
        assert!(
            (est.value - exact).abs() < 4.0 * se,
            "mc {} vs exact {exact} (se {se})",
            est.value
        );
    }

    #[test]
    fn extrapolated_dmt_limit_sits_below_every_finite_cumulant() {
        let params = HermiteParams::new(2, 0.7).unwrap();
        let est = asymptotic_variance(params, VarianceMethod::DmtLimit { n: 512 }, 0, 0).unwrap();
        assert!(est.std_error.is_none());
        // The finite-length cumulants decrease toward the limit, so the
        // accelerated value must undercut the largest length used while
        // staying within the observed drift of the tail.
        let k_finite = fourth_cumulant_order2(2048, params).unwrap();
        assert!(est.value < 2.0 + k_finite);
        assert!(
            est.value > 2.0 + k_finite - 0.9,
            "limit {} too far below the n = 2048 cumulant {}",
            est.value,
            2.0 + k_finite
        );
    }

    #[test]
    fn chaos_variance_estimate_matches_its_spectral_moments() {
        let params = HermiteParams::new(2, 0.7).unwrap();
        let config = DominantConfig::default();
        let partition = rescaled_domain(64.0, config.subdivisions, 8.0, 1.06).unwrap();
        let kernel = rescaled_increment_kernel(params, &partition, 24).unwrap();
        let spectrum = kernel.spectrum_corrected().unwrap();
        let exact = spectrum.fourth_moment() - 1.0;
        let est =
            asymptotic_variance(params, VarianceMethod::McChaos { k_width: 64 }, 30_000, 9)
                .unwrap();
        let se = est.std_error.unwrap();
        assert!(
            (est.value - exact).abs() < 4.0 * se,
            "mc {} vs exact {exact} (se {se})",
            est.value
        );
    }
}
