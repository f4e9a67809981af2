//! Ornstein-Uhlenbeck process driven by a simulated path: Euler solution of
//! the unit-mean-reversion Langevin equation, its modified quadratic
//! variation, and the Hurst estimator read off it.
//!
//! The solution never leaves the driver's grid.  With `X_0 = 0` the Euler
//! recurrence keeps `X_k = Z_k - Z_0 + Y_k` exactly, where `Y` is the
//! left-endpoint Riemann sum of `-X`, so the variation of `X` splits into
//! the driver's variation plus a quadratic drift term and a cross term with
//! no approximation beyond the solve itself.  Both drift terms shrink
//! geometrically in the resolution, which is what lets the driver's limit
//! law carry over.

use crate::error::{Error, Result};
use crate::increments::{select_indices, DominantConfig, DominantLaw, DyadicScheme, IncrementSet};
use crate::process::{HermiteParams, SamplePath};
use crate::quadvar::{compute_sn, compute_vn, estimate_hurst, studentized_deviation};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Checks for the full dyadic grid `{j 2^-n, j = 0..m}` and returns `n`.
/// Dyadic points are exactly representable, so comparisons are exact.
fn dyadic_level(times: &[f64]) -> Result<u32> {
    if times.len() < 2 {
        return Err(Error::InvalidParams(
            "need at least two grid points to solve".into(),
        ));
    }
    if times[0] != 0.0 {
        return Err(Error::InvalidParams(format!(
            "grid must start at 0, got {}",
            times[0]
        )));
    }
    let h = times[1];
    let level = -h.log2();
    if !(h > 0.0) || level.fract() != 0.0 || level < 0.0 || level > 62.0 {
        return Err(Error::InvalidParams(format!(
            "grid step must be 2^-n for some n in 0..=62, got {h}"
        )));
    }
    let n = level as u32;
    for (j, &t) in times.iter().enumerate() {
        if t != j as f64 * h {
            return Err(Error::InvalidParams(format!(
                "grid is not uniform dyadic: point {j} is {t}, expected {}",
                j as f64 * h
            )));
        }
    }
    Ok(n)
}

/// Euler solution sampled on the driver's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HouPath {
    driver: SamplePath,
    x_values: Vec<f64>,
    level: u32,
}

impl HouPath {
    /// Pairs solution values with their driver.  The grid must be the full
    /// dyadic grid and the solution must start at 0.
    pub fn new(driver: SamplePath, x_values: Vec<f64>) -> Result<Self> {
        let level = dyadic_level(driver.times())?;
        if x_values.len() != driver.times().len() {
            return Err(Error::InvalidParams(format!(
                "solution ({}) and driver ({}) differ in length",
                x_values.len(),
                driver.times().len()
            )));
        }
        if x_values[0] != 0.0 {
            return Err(Error::InvalidParams(format!(
                "solution must start at 0, got {}",
                x_values[0]
            )));
        }
        Ok(Self {
            driver,
            x_values,
            level,
        })
    }

    pub fn times(&self) -> &[f64] {
        self.driver.times()
    }

    pub fn x_values(&self) -> &[f64] {
        &self.x_values
    }

    pub fn driver(&self) -> &SamplePath {
        &self.driver
    }

    /// Dyadic resolution of the grid.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn step(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    fn extract(
        &self,
        values: &[f64],
        scheme: &DyadicScheme,
        restricted: bool,
    ) -> Result<IncrementSet> {
        if self.level < scheme.n() {
            return Err(Error::InvalidParams(format!(
                "grid resolution 2^-{} is coarser than the scheme step 2^-{}",
                self.level,
                scheme.n()
            )));
        }
        let indices = select_indices(scheme, restricted)?;
        let stride = 1u64 << (self.level - scheme.n());
        let span = scheme.spacing() * stride;
        let mut missing = Vec::new();
        let mut anchors = Vec::with_capacity(indices.len());
        let mut deltas = Vec::with_capacity(indices.len());
        for &l in &indices {
            let from = l * span;
            let to = from + stride;
            if to as usize >= values.len() {
                missing.push(scheme.anchor(l) + scheme.step());
                continue;
            }
            anchors.push(scheme.anchor(l));
            deltas.push(values[to as usize] - values[from as usize]);
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

    /// Solution increments at the scheme's anchors.
    pub fn increments(&self, scheme: &DyadicScheme, restricted: bool) -> Result<IncrementSet> {
        self.extract(&self.x_values, scheme, restricted)
    }

    /// Driver increments at the same anchors.
    pub fn driver_increments(
        &self,
        scheme: &DyadicScheme,
        restricted: bool,
    ) -> Result<IncrementSet> {
        self.extract(self.driver.values(), scheme, restricted)
    }
}

/// Explicit Euler solve of `X' = -X + driver noise` with `X_0 = 0` on the
/// driver's own grid: `X_{k+1} = X_k - X_k h + (Z_{k+1} - Z_k)`.  The
/// integration bias is O(h) and sits well below statistical error at the
/// resolutions used here.
pub fn solve_langevin(driver: &SamplePath) -> Result<HouPath> {
    let level = dyadic_level(driver.times())?;
    let h = (-(level as f64)).exp2();
    let z = driver.values();
    let mut x = Vec::with_capacity(z.len());
    x.push(0.0);
    for k in 0..z.len() - 1 {
        let prev = x[k];
        x.push(prev - prev * h + (z[k + 1] - z[k]));
    }
    HouPath::new(driver.clone(), x)
}

/// Modified quadratic variation of the solution.  The centering constant is
/// the driver's increment expectation `2^-2HN`, not the solution's, so this
/// is `compute_vn` applied to the solution's increments.
pub fn compute_vnx(hou: &HouPath, scheme: &DyadicScheme, hurst: f64) -> Result<f64> {
    let incs = hou.increments(scheme, true)?;
    compute_vn(&incs, hurst)
}

/// Exact split of the solution's variation around the driver's.
///
/// With drift increments `dY = dX - dZ`, expanding `(dZ + dY)^2` per anchor
/// gives `v_n_x = v_n_driver + quadratic_drift + cross_drift` identically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VnxDecomposition {
    pub v_n_x: f64,
    pub v_n_driver: f64,
    pub quadratic_drift: f64,
    pub cross_drift: f64,
}

pub fn vnx_decomposition(
    hou: &HouPath,
    scheme: &DyadicScheme,
    hurst: f64,
) -> Result<VnxDecomposition> {
    let x = hou.increments(scheme, true)?;
    let z = hou.driver_increments(scheme, true)?;
    let root = (x.len() as f64).sqrt();
    let scale = (2.0 * hurst * scheme.n() as f64).exp2();
    let mut quadratic = 0.0;
    let mut cross = 0.0;
    for (dx, dz) in x.deltas.iter().zip(&z.deltas) {
        let dy = dx - dz;
        quadratic += scale * dy * dy;
        cross += scale * 2.0 * dz * dy;
    }
    Ok(VnxDecomposition {
        v_n_x: compute_vn(&x, hurst)?,
        v_n_driver: compute_vn(&z, hurst)?,
        quadratic_drift: quadratic / root,
        cross_drift: cross / root,
    })
}

/// Hurst estimator from the solution's increments.
pub fn estimate_hurst_hou(hou: &HouPath, scheme: &DyadicScheme) -> Result<f64> {
    let incs = hou.increments(scheme, true)?;
    estimate_hurst(compute_sn(&incs)?, scheme.n())
}

/// Controls for the hybrid increment sampler.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HybridConfig {
    /// Multiplies the `2^-N` bound on the drift increment's standard
    /// deviation; 1 matches the unit moment bound of the solution.
    pub drift_scale: f64,
    pub dominant: DominantConfig,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            drift_scale: 1.0,
            dominant: DominantConfig::default(),
        }
    }
}

/// One replication's increments under the hybrid construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridDraw {
    /// Solution-like increments: driver plus drift proxy.
    pub x: IncrementSet,
    /// Driver increments alone.
    pub z: IncrementSet,
}

/// Hybrid sampler for resolutions no full-grid solve can reach: driver
/// increments are i.i.d. draws from the dominant single-increment law, and
/// drift corrections are independent Gaussians whose standard deviation
/// `drift_scale * 2^-N` matches the Cauchy-Schwarz bound satisfied by the
/// true drift increments.
pub struct HybridSampler {
    scheme: DyadicScheme,
    params: HermiteParams,
    law: DominantLaw,
    scale: f64,
    drift_sd: f64,
    count: usize,
}

impl HybridSampler {
    pub fn new(
        scheme: &DyadicScheme,
        params: HermiteParams,
        config: &HybridConfig,
    ) -> Result<Self> {
        params.validate()?;
        if !(config.drift_scale >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "drift scale must be nonnegative, got {}",
                config.drift_scale
            )));
        }
        let law = DominantLaw::build(scheme, params, &config.dominant)?;
        let count = select_indices(scheme, true)?.len();
        Ok(Self {
            scheme: *scheme,
            params,
            law,
            scale: (scheme.n() as f64 * params.hurst).exp2().recip(),
            drift_sd: config.drift_scale * scheme.step(),
            count,
        })
    }

    pub fn scheme(&self) -> &DyadicScheme {
        &self.scheme
    }

    /// Exact second moment of one scaled driver increment, for pricing the
    /// gap between the sampled law and the target `2^-2HN`.
    pub fn driver_second_moment(&self) -> Result<f64> {
        Ok(self.scale * self.scale * self.law.second_moment()?)
    }

    /// One replication: `count` independent driver draws plus drift
    /// proxies.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> HybridDraw {
        let indices: Vec<u64> = (1..=self.count as u64).collect();
        let anchors: Vec<f64> = indices.iter().map(|&l| self.scheme.anchor(l)).collect();
        let mut dz = Vec::with_capacity(self.count);
        let mut dx = Vec::with_capacity(self.count);
        for _ in 0..self.count {
            let z = self.scale * self.law.draw_unit(rng);
            let g: f64 = rng.sample(StandardNormal);
            dz.push(z);
            dx.push(z + self.drift_sd * g);
        }
        HybridDraw {
            x: IncrementSet {
                scheme: self.scheme,
                indices: indices.clone(),
                anchors: anchors.clone(),
                deltas: dx,
            },
            z: IncrementSet {
                scheme: self.scheme,
                indices,
                anchors,
                deltas: dz,
            },
        }
    }

    /// Normalized estimator deviation of one replication.
    pub fn draw_studentized<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let draw = self.draw(rng);
        let h_hat = estimate_hurst(compute_sn(&draw.x)?, self.scheme.n())?;
        Ok(studentized_deviation(h_hat, self.params.hurst, &self.scheme))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{FgnGenerator, SimMethod};
    use crate::stats;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dyadic_times(n: u32, count: usize) -> Vec<f64> {
        let h = (-(n as f64)).exp2();
        (0..count).map(|j| j as f64 * h).collect()
    }

    fn fbm_driver(n: u32, hurst: f64, gen: &FgnGenerator, rng: &mut ChaCha8Rng) -> SamplePath {
        let h = (-(n as f64)).exp2();
        let values = gen.sample_path(h, hurst, rng);
        let times = dyadic_times(n, values.len());
        let params = HermiteParams::new(1, hurst).unwrap();
        SamplePath::new(times, values, SimMethod::GaussianExact, params, 0).unwrap()
    }

    #[test]
    fn zero_driver_stays_at_zero() {
        let times = dyadic_times(6, 65);
        let params = HermiteParams::new(1, 0.7).unwrap();
        let driver =
            SamplePath::new(times, vec![0.0; 65], SimMethod::GaussianExact, params, 0).unwrap();
        let hou = solve_langevin(&driver).unwrap();
        assert!(hou.x_values().iter().all(|&x| x == 0.0));
        assert_eq!(hou.level(), 6);
    }

    #[test]
    fn euler_tracks_the_deterministic_relaxation_curve() {
        // Unit-slope driver turns the equation into x' = 1 - x, whose
        // solution from 0 is 1 - e^-t; that closed form is the oracle.
        let n = 12;
        let times = dyadic_times(n, (1 << n) + 1);
        let values = times.clone();
        let params = HermiteParams::new(1, 0.7).unwrap();
        let driver =
            SamplePath::new(times, values, SimMethod::GaussianExact, params, 0).unwrap();
        let hou = solve_langevin(&driver).unwrap();
        let sup_err = hou
            .times()
            .iter()
            .zip(hou.x_values())
            .map(|(&t, &x)| (x - (1.0 - (-t).exp())).abs())
            .fold(0.0, f64::max);
        assert!(sup_err < 1e-3, "sup error {sup_err}");
    }

    #[test]
    fn irregular_grids_are_rejected() {
        let params = HermiteParams::new(1, 0.7).unwrap();
        let uneven = SamplePath::new(
            vec![0.0, 0.25, 0.5, 0.8],
            vec![0.0; 4],
            SimMethod::GaussianExact,
            params,
            0,
        )
        .unwrap();
        assert!(solve_langevin(&uneven).is_err());
        let non_dyadic = SamplePath::new(
            (0..5).map(|j| 0.1 * j as f64).collect(),
            vec![0.0; 5],
            SimMethod::GaussianExact,
            params,
            0,
        )
        .unwrap();
        assert!(solve_langevin(&non_dyadic).is_err());
    }

    #[test]
    fn second_moment_stays_bounded_under_refinement() {
        let hurst = 0.7;
        let reps = 400;
        let mut sups = Vec::new();
        for n in [8u32, 9] {
            let m = 1usize << n;
            let gen = FgnGenerator::new(m, hurst).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            let mut sums = vec![0.0; m + 1];
            for _ in 0..reps {
                let driver = fbm_driver(n, hurst, &gen, &mut rng);
                let hou = solve_langevin(&driver).unwrap();
                for (s, &x) in sums.iter_mut().zip(hou.x_values()) {
                    *s += x * x;
                }
            }
            let sup = sums.iter().map(|s| s / reps as f64).fold(0.0, f64::max);
            assert!(sup < 1.5, "n = {n}: sup second moment {sup}");
            sups.push(sup);
        }
        let rel = (sups[1] - sups[0]).abs() / sups[0];
        assert!(rel < 0.2, "sup moments {sups:?} moved by {rel}");
    }

    #[test]
    fn solution_equal_to_driver_reduces_to_plain_variation() {
        let n = 10;
        let gen = FgnGenerator::new(1 << n, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let driver = fbm_driver(n, 0.7, &gen, &mut rng);
        let hou = HouPath::new(driver.clone(), driver.values().to_vec()).unwrap();
        let scheme = DyadicScheme::new(n, 0.9, 0.3).unwrap();
        let direct = compute_vn(&hou.driver_increments(&scheme, true).unwrap(), 0.7).unwrap();
        assert_eq!(compute_vnx(&hou, &scheme, 0.7).unwrap(), direct);
        assert_eq!(
            estimate_hurst_hou(&hou, &scheme).unwrap(),
            estimate_hurst(
                compute_sn(&hou.driver_increments(&scheme, true).unwrap()).unwrap(),
                n
            )
            .unwrap()
        );
    }

    #[test]
    fn decomposition_is_an_identity() {
        let n = 10;
        let gen = FgnGenerator::new(1 << n, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let scheme = DyadicScheme::new(n, 0.9, 0.3).unwrap();
        for _ in 0..20 {
            let driver = fbm_driver(n, 0.7, &gen, &mut rng);
            let hou = solve_langevin(&driver).unwrap();
            let d = vnx_decomposition(&hou, &scheme, 0.7).unwrap();
            assert_relative_eq!(
                d.v_n_x,
                d.v_n_driver + d.quadratic_drift + d.cross_drift,
                max_relative = 1e-10,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn quadratic_drift_term_shrinks_with_resolution() {
        let hurst = 0.7;
        let reps = 60;
        let mut means = Vec::new();
        for n in [8u32, 10, 12] {
            let gen = FgnGenerator::new(1 << n, hurst).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let scheme = DyadicScheme::new(n, 0.9, 0.3).unwrap();
            let mut acc = 0.0;
            for _ in 0..reps {
                let driver = fbm_driver(n, hurst, &gen, &mut rng);
                let hou = solve_langevin(&driver).unwrap();
                acc += vnx_decomposition(&hou, &scheme, hurst)
                    .unwrap()
                    .quadratic_drift
                    .abs();
            }
            means.push(acc / reps as f64);
        }
        assert!(
            means[0] > means[1] && means[1] > means[2],
            "mean |quadratic drift| not decreasing: {means:?}"
        );
    }

    #[test]
    fn drift_increment_variance_scales_like_the_squared_step() {
        let hurst = 0.7;
        let reps = 100;
        let mut moments = Vec::new();
        for n in [8u32, 10] {
            let gen = FgnGenerator::new(1 << n, hurst).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            let scheme = DyadicScheme::new(n, 0.9, 0.3).unwrap();
            let mut acc = 0.0;
            let mut count = 0usize;
            for _ in 0..reps {
                let driver = fbm_driver(n, hurst, &gen, &mut rng);
                let hou = solve_langevin(&driver).unwrap();
                let x = hou.increments(&scheme, true).unwrap();
                let z = hou.driver_increments(&scheme, true).unwrap();
                for (dx, dz) in x.deltas.iter().zip(&z.deltas) {
                    let dy = dx - dz;
                    acc += dy * dy;
                    count += 1;
                }
            }
            moments.push(acc / count as f64);
        }
        let ratio = moments[1] / moments[0];
        // The bound E dY^2 <= C 4^-N forces the ratio across N = 8 -> 10
        // down to 4^-2; allow a factor-2 slack for Monte Carlo noise.
        assert!(ratio < 2.0 / 16.0, "ratio {ratio}, moments {moments:?}");
    }

    #[test]
    fn estimator_error_shrinks_from_coarse_to_fine_resolution() {
        let hurst = 0.7;
        let reps = 500;
        let mut mean_abs = Vec::new();
        for n in [10u32, 14] {
            let gen = FgnGenerator::new(1 << n, hurst).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let scheme = DyadicScheme::new(n, 0.9, 0.3).unwrap();
            let mut acc = 0.0;
            for _ in 0..reps {
                let driver = fbm_driver(n, hurst, &gen, &mut rng);
                let hou = solve_langevin(&driver).unwrap();
                acc += (estimate_hurst_hou(&hou, &scheme).unwrap() - hurst).abs();
            }
            mean_abs.push(acc / reps as f64);
        }
        assert!(
            mean_abs[1] < mean_abs[0],
            "mean |H_hat - H| did not decrease: {mean_abs:?}"
        );
    }

    #[test]
    fn solution_and_driver_estimates_converge_together() {
        let hurst = 0.7;
        let reps = 100;
        let mut gaps = Vec::new();
        for n in [8u32, 12] {
            let gen = FgnGenerator::new(1 << n, hurst).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(19);
            let scheme = DyadicScheme::new(n, 0.9, 0.3).unwrap();
            let mut acc = 0.0;
            for _ in 0..reps {
                let driver = fbm_driver(n, hurst, &gen, &mut rng);
                let hou = solve_langevin(&driver).unwrap();
                let h_x = estimate_hurst_hou(&hou, &scheme).unwrap();
                let h_z = estimate_hurst(
                    compute_sn(&hou.driver_increments(&scheme, true).unwrap()).unwrap(),
                    n,
                )
                .unwrap();
                acc += (h_x - h_z).abs();
            }
            gaps.push(acc / reps as f64);
        }
        assert!(
            gaps[1] < gaps[0],
            "mean |H_hat(X) - H_hat(Z)| did not decrease: {gaps:?}"
        );
    }

    #[test]
    fn hybrid_studentized_deviation_has_the_limit_variance() {
        let scheme = DyadicScheme::with_counts(20, 1024, 512).unwrap();
        let params = HermiteParams::new(1, 0.7).unwrap();
        let sampler = HybridSampler::new(&scheme, params, &HybridConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let reps = 3000;
        let draws: Vec<f64> = (0..reps)
            .map(|_| sampler.draw_studentized(&mut rng).unwrap())
            .collect();
        let var = stats::variance(&draws);
        assert!(
            (var - 2.0).abs() < 0.2,
            "studentized variance {var} not within 10% of 2"
        );
    }

    #[test]
    fn hybrid_driver_moment_prices_the_deficit() {
        let scheme = DyadicScheme::with_counts(20, 1024, 512).unwrap();
        let params = HermiteParams::new(1, 0.7).unwrap();
        let sampler = HybridSampler::new(&scheme, params, &HybridConfig::default()).unwrap();
        let m2 = sampler.driver_second_moment().unwrap();
        let target = (-2.0 * 0.7 * 20.0_f64).exp2();
        let ratio = m2 / target;
        assert!(
            ratio > 0.97 && ratio < 1.0,
            "scaled driver moment ratio {ratio}"
        );
    }

    #[test]
    fn anchors_beyond_the_grid_are_reported() {
        let n = 8;
        let gen = FgnGenerator::new(1 << 4, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let h = (-(n as f64)).exp2();
        let values = gen.sample_path(h, 0.7, &mut rng);
        let times = dyadic_times(n, values.len());
        let params = HermiteParams::new(1, 0.7).unwrap();
        let driver =
            SamplePath::new(times, values, SimMethod::GaussianExact, params, 0).unwrap();
        let hou = solve_langevin(&driver).unwrap();
        let scheme = DyadicScheme::new(n, 0.9, 0.3).unwrap();
        assert!(matches!(
            hou.increments(&scheme, true),
            Err(Error::MissingTimes { .. })
        ));
    }
}
