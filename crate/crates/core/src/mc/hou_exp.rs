//! The Langevin solution against its driver: decomposition residual, drift
//! remainder, and estimator transfer, per resolution.
//!
//! Exact mode builds full dyadic driver paths (order 1), dmt mode uses
//! partial sums on the same grid, and iid-dominant mode uses the hybrid
//! increment sampler whose drift proxies obey the same moment bound as the
//! true drift term.  Chaos mode has no full-grid sampler and is refused.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hou::{
    estimate_hurst_hou, solve_langevin, vnx_decomposition, HybridConfig, HybridSampler,
};
use crate::increments::DyadicScheme;
use crate::mc::config::{ExperimentConfig, ExperimentKind, SampleMode};
use crate::mc::pipeline::{resolve_sigma, try_par_replications, EXACT_LEVEL_CAP};
use crate::mc::report::{ReportMeta, Tabular};
use crate::mc::runtime::with_workers;
use crate::mc::seed::mix_seed;
use crate::process::{DmtConfig, DmtSampler, FgnGenerator, SamplePath, SimMethod};
use crate::quadvar::{compute_sn, estimate_hurst, studentized_deviation};
use crate::stats;

const SALT_SIGMA: u64 = 0xFFFF_0003;
const SALT_POINT: u64 = 0x0005_0000;

/// Runner knobs for the Langevin experiment.
#[derive(Debug, Clone)]
pub struct HouOptions {
    pub workers: Option<usize>,
    pub dmt_length: usize,
    pub hybrid: HybridConfig,
    pub variance_draws: usize,
}

impl Default for HouOptions {
    fn default() -> Self {
        HouOptions {
            workers: None,
            dmt_length: 512,
            hybrid: HybridConfig::default(),
            variance_draws: 20_000,
        }
    }
}

/// One sweep point of the Langevin experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouRow {
    pub scheme: DyadicScheme,
    pub cardinality: usize,
    /// Largest relative gap, over replications, between the variation of
    /// the solution and the sum of its decomposition parts.  Absent in
    /// iid-dominant mode, where the identity holds by construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rel_residual: Option<f64>,
    pub mean_abs_quadratic_drift: f64,
    pub se_abs_quadratic_drift: f64,
    pub mean_h_x: f64,
    pub se_mean_h_x: f64,
    pub bias_x: f64,
    pub mean_h_z: f64,
    pub se_mean_h_z: f64,
    pub bias_z: f64,
    pub studentized_variance_x: f64,
    pub se_studentized_variance_x: f64,
}

/// Langevin sweep report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouReport {
    pub meta: ReportMeta,
    pub hurst_true: f64,
    pub sigma_method: String,
    pub sigma_squared: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_std_error: Option<f64>,
    pub rows: Vec<HouRow>,
}

impl Tabular for HouReport {
    fn headers(&self) -> Vec<&'static str> {
        vec![
            "n",
            "spacing",
            "cardinality",
            "max_rel_residual",
            "mean_abs_quadratic_drift",
            "se_abs_quadratic_drift",
            "mean_h_x",
            "se_mean_h_x",
            "bias_x",
            "mean_h_z",
            "se_mean_h_z",
            "bias_z",
            "studentized_variance_x",
            "se_studentized_variance_x",
        ]
    }

    fn rows(&self) -> Vec<Vec<Option<f64>>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    Some(r.scheme.n() as f64),
                    Some(r.scheme.spacing() as f64),
                    Some(r.cardinality as f64),
                    r.max_rel_residual,
                    Some(r.mean_abs_quadratic_drift),
                    Some(r.se_abs_quadratic_drift),
                    Some(r.mean_h_x),
                    Some(r.se_mean_h_x),
                    Some(r.bias_x),
                    Some(r.mean_h_z),
                    Some(r.se_mean_h_z),
                    Some(r.bias_z),
                    Some(r.studentized_variance_x),
                    Some(r.se_studentized_variance_x),
                ]
            })
            .collect()
    }

    fn plots(&self) -> Vec<(&'static str, usize, usize)> {
        vec![("drift-vs-n", 0, 4), ("bias-x-vs-n", 0, 8)]
    }
}

struct RepStats {
    residual: f64,
    abs_drift: f64,
    h_x: f64,
    h_z: f64,
}

fn path_rows(
    scheme: &DyadicScheme,
    config: &ExperimentConfig,
    options: &HouOptions,
    seed: u64,
) -> Result<(Option<f64>, Vec<RepStats>)> {
    let params = config.params;
    let n = scheme.n();
    if n > EXACT_LEVEL_CAP {
        return Err(Error::InvalidParams(format!(
            "resolution {n} exceeds the full-grid cap {EXACT_LEVEL_CAP}"
        )));
    }
    let cells = 1usize << n;
    let step = scheme.step();
    let times: Vec<f64> = (0..=cells).map(|j| j as f64 * step).collect();

    enum Driver {
        Gaussian(FgnGenerator),
        PartialSum(DmtSampler),
    }
    let driver = match config.mode {
        SampleMode::Exact => {
            if params.q != 1 {
                return Err(Error::Mode(format!(
                    "exact full-grid sampling covers order 1 only, got order {}",
                    params.q
                )));
            }
            Driver::Gaussian(FgnGenerator::new(cells, params.hurst)?)
        }
        _ => {
            if (options.dmt_length as f64) * step < 4.0 {
                return Err(Error::InvalidParams(format!(
                    "partial sums of length {} cannot resolve step {step}",
                    options.dmt_length
                )));
            }
            Driver::PartialSum(DmtSampler::new(
                DmtConfig::new(options.dmt_length)?,
                params,
                1.0,
            )?)
        }
    };
    let method = match config.mode {
        SampleMode::Exact => SimMethod::GaussianExact,
        _ => SimMethod::DmtSum,
    };

    let stats_per_rep = try_par_replications(config.replications, seed, |rng| {
        let values = match &driver {
            Driver::Gaussian(g) => g.sample_path(step, params.hurst, rng),
            Driver::PartialSum(s) => s.draw(&times, rng)?,
        };
        let path = SamplePath::new(times.clone(), values, method, params, seed)?;
        let hou = solve_langevin(&path)?;
        let deco = vnx_decomposition(&hou, scheme, params.hurst)?;
        let recombined = deco.v_n_driver + deco.quadratic_drift + deco.cross_drift;
        let residual = (deco.v_n_x - recombined).abs() / deco.v_n_x.abs().max(1.0);
        let h_x = estimate_hurst_hou(&hou, scheme)?;
        let z = hou.driver_increments(scheme, true)?;
        let h_z = estimate_hurst(compute_sn(&z)?, scheme.n())?;
        Ok(RepStats {
            residual,
            abs_drift: deco.quadratic_drift.abs(),
            h_x,
            h_z,
        })
    })?;
    let max_residual = stats_per_rep
        .iter()
        .map(|r| r.residual)
        .fold(0.0f64, f64::max);
    Ok((Some(max_residual), stats_per_rep))
}

fn hybrid_rows(
    scheme: &DyadicScheme,
    config: &ExperimentConfig,
    options: &HouOptions,
    seed: u64,
) -> Result<(Option<f64>, Vec<RepStats>)> {
    let params = config.params;
    let sampler = HybridSampler::new(scheme, params, &options.hybrid)?;
    let scale = (2.0 * params.hurst * scheme.n() as f64).exp2();
    let stats_per_rep = try_par_replications(config.replications, seed, |rng| {
        let draw = sampler.draw(rng);
        let root = (draw.x.len() as f64).sqrt();
        let quadratic: f64 = draw
            .x
            .deltas
            .iter()
            .zip(&draw.z.deltas)
            .map(|(dx, dz)| {
                let dy = dx - dz;
                scale * dy * dy
            })
            .sum::<f64>()
            / root;
        Ok(RepStats {
            residual: 0.0,
            abs_drift: quadratic.abs(),
            h_x: estimate_hurst(compute_sn(&draw.x)?, scheme.n())?,
            h_z: estimate_hurst(compute_sn(&draw.z)?, scheme.n())?,
        })
    })?;
    Ok((None, stats_per_rep))
}

/// Runs a Langevin experiment with default runner knobs.
pub fn run_hou_experiment(config: &ExperimentConfig) -> Result<HouReport> {
    run_hou_experiment_with(config, &HouOptions::default())
}

/// Runs a Langevin experiment; deterministic in `(config, master_seed)`.
pub fn run_hou_experiment_with(
    config: &ExperimentConfig,
    options: &HouOptions,
) -> Result<HouReport> {
    config.validate()?;
    if config.kind != ExperimentKind::Hou {
        return Err(Error::Config(format!(
            "hou runner received a {} config",
            config.kind.as_str()
        )));
    }
    if config.mode == SampleMode::Chaos {
        return Err(Error::Mode(
            "chaos mode cannot drive full grids; use exact, dmt, or iid-dominant".into(),
        ));
    }
    let schemes = config.scheme.to_schemes()?;
    let hurst = config.params.hurst;
    let (sigma, sigma_method) = resolve_sigma(
        config.params,
        options.variance_draws,
        mix_seed(config.master_seed, SALT_SIGMA),
    )?;
    let rows = with_workers(options.workers, || -> Result<Vec<HouRow>> {
        let mut rows = Vec::with_capacity(schemes.len());
        for (i, scheme) in schemes.iter().enumerate() {
            let seed = mix_seed(config.master_seed, SALT_POINT + i as u64);
            let (max_rel_residual, reps) = match config.mode {
                SampleMode::IidDominant => hybrid_rows(scheme, config, options, seed)?,
                _ => path_rows(scheme, config, options, seed)?,
            };
            let drifts: Vec<f64> = reps.iter().map(|r| r.abs_drift).collect();
            let hx: Vec<f64> = reps.iter().map(|r| r.h_x).collect();
            let hz: Vec<f64> = reps.iter().map(|r| r.h_z).collect();
            let devs: Vec<f64> = hx
                .iter()
                .map(|&h| studentized_deviation(h, hurst, scheme))
                .collect();
            rows.push(HouRow {
                scheme: *scheme,
                cardinality: scheme.cardinality(true) as usize,
                max_rel_residual,
                mean_abs_quadratic_drift: stats::mean(&drifts),
                se_abs_quadratic_drift: stats::se_mean(&drifts),
                mean_h_x: stats::mean(&hx),
                se_mean_h_x: stats::se_mean(&hx),
                bias_x: stats::mean(&hx) - hurst,
                mean_h_z: stats::mean(&hz),
                se_mean_h_z: stats::se_mean(&hz),
                bias_z: stats::mean(&hz) - hurst,
                studentized_variance_x: stats::variance(&devs),
                se_studentized_variance_x: stats::se_variance(&devs),
            });
        }
        Ok(rows)
    })??;

    Ok(HouReport {
        meta: ReportMeta::from_config(config),
        hurst_true: hurst,
        sigma_method: sigma_method.to_string(),
        sigma_squared: sigma.value,
        sigma_std_error: sigma.std_error,
        rows,
    })
}
