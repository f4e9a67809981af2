//! Bias, RMSE, and studentized deviation of the Hurst estimator across a
//! resolution sweep, in any sampling mode.

use serde::{Deserialize, Serialize};

use crate::chaos::PartitionNoise;
use crate::error::{Error, Result};
use crate::increments::{DominantConfig, DominantLaw, DyadicScheme};
use crate::mc::config::{ExperimentConfig, ExperimentKind, SampleMode};
use crate::mc::pipeline::{
    build_rescaled_decomposition, par_replications, resolve_sigma, sample_deltas_dmt,
    sample_deltas_exact, sn_of_deltas, try_par_replications, DecompositionOptions,
};
use crate::mc::report::{ReportMeta, Tabular};
use crate::mc::runtime::with_workers;
use crate::mc::seed::mix_seed;
use crate::quadvar::{estimate_hurst, studentized_deviation};
use crate::stats;

const SALT_SIGMA: u64 = 0xFFFF_0002;
const SALT_POINT: u64 = 0x0003_0000;

/// Runner knobs for the estimator experiment.
#[derive(Debug, Clone)]
pub struct EstimatorOptions {
    pub workers: Option<usize>,
    pub dominant: DominantConfig,
    pub decomposition: DecompositionOptions,
    pub dmt_length: usize,
    pub variance_draws: usize,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            workers: None,
            dominant: DominantConfig {
                subdivisions: 16,
                ..DominantConfig::default()
            },
            decomposition: DecompositionOptions::default(),
            dmt_length: 512,
            variance_draws: 20_000,
        }
    }
}

/// One sweep point of the estimator experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorRow {
    pub scheme: DyadicScheme,
    pub cardinality: usize,
    pub mean_h: f64,
    pub se_mean_h: f64,
    pub bias: f64,
    pub rmse: f64,
    /// Sample variance of the studentized deviation; its limit is the
    /// comparison variance in the report head.
    pub studentized_variance: f64,
    pub se_studentized_variance: f64,
    /// Estimator error when fed the analytic expectation of the statistic;
    /// zero up to rounding.
    pub plugin_bias: f64,
}

/// Estimator sweep report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub meta: ReportMeta,
    pub hurst_true: f64,
    pub sigma_method: String,
    pub sigma_squared: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_std_error: Option<f64>,
    pub rows: Vec<EstimatorRow>,
}

impl Tabular for EstimatorReport {
    fn headers(&self) -> Vec<&'static str> {
        vec![
            "n",
            "spacing",
            "cardinality",
            "mean_h",
            "se_mean_h",
            "bias",
            "rmse",
            "studentized_variance",
            "se_studentized_variance",
            "plugin_bias",
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
                    Some(r.mean_h),
                    Some(r.se_mean_h),
                    Some(r.bias),
                    Some(r.rmse),
                    Some(r.studentized_variance),
                    Some(r.se_studentized_variance),
                    Some(r.plugin_bias),
                ]
            })
            .collect()
    }

    fn plots(&self) -> Vec<(&'static str, usize, usize)> {
        vec![
            ("bias-vs-n", 0, 5),
            ("studentized-variance-vs-cardinality", 2, 7),
        ]
    }
}

fn sn_sample(
    scheme: &DyadicScheme,
    config: &ExperimentConfig,
    options: &EstimatorOptions,
    seed: u64,
) -> Result<Vec<f64>> {
    let params = config.params;
    let m = config.replications;
    match config.mode {
        SampleMode::Exact => Ok(sample_deltas_exact(scheme, params, m, seed)?
            .iter()
            .map(|d| sn_of_deltas(d))
            .collect()),
        SampleMode::Dmt => Ok(sample_deltas_dmt(scheme, params, options.dmt_length, m, seed)?
            .iter()
            .map(|d| sn_of_deltas(d))
            .collect()),
        SampleMode::IidDominant => {
            let law = DominantLaw::build(scheme, params, &options.dominant)?;
            let cardinality = scheme.cardinality(true) as usize;
            let scale = (2.0 * params.hurst * scheme.n() as f64).exp2().recip();
            Ok(par_replications(m, seed, |rng| {
                let mut acc = 0.0;
                for _ in 0..cardinality {
                    let x = law.draw_unit(rng);
                    acc += x * x;
                }
                scale * acc / cardinality as f64
            }))
        }
        SampleMode::Chaos => {
            let (decomposition, partition) =
                build_rescaled_decomposition(scheme, params, &options.decomposition)?;
            let scale = (2.0 * params.hurst * scheme.n() as f64).exp2().recip();
            try_par_replications(m, seed, |rng| {
                let noise = PartitionNoise::generate(&partition, rng);
                let decomposed = decomposition.evaluate(&noise)?;
                let mean_sq = decomposed.iter().map(|d| d.total * d.total).sum::<f64>()
                    / decomposed.len() as f64;
                Ok(scale * mean_sq)
            })
        }
    }
}

/// Runs an estimator experiment with default runner knobs.
pub fn run_estimator_experiment(config: &ExperimentConfig) -> Result<EstimatorReport> {
    run_estimator_experiment_with(config, &EstimatorOptions::default())
}

/// Runs an estimator experiment; deterministic in `(config, master_seed)`.
pub fn run_estimator_experiment_with(
    config: &ExperimentConfig,
    options: &EstimatorOptions,
) -> Result<EstimatorReport> {
    config.validate()?;
    if config.kind != ExperimentKind::Estimator {
        return Err(Error::Config(format!(
            "estimator runner received a {} config",
            config.kind.as_str()
        )));
    }
    let schemes = config.scheme.to_schemes()?;
    let hurst = config.params.hurst;
    let (sigma, sigma_method) = resolve_sigma(
        config.params,
        options.variance_draws,
        mix_seed(config.master_seed, SALT_SIGMA),
    )?;
    let rows = with_workers(options.workers, || -> Result<Vec<EstimatorRow>> {
        let mut rows = Vec::with_capacity(schemes.len());
        for (i, scheme) in schemes.iter().enumerate() {
            let seed = mix_seed(config.master_seed, SALT_POINT + i as u64);
            let sns = sn_sample(scheme, config, options, seed)?;
            let mut hats = Vec::with_capacity(sns.len());
            let mut devs = Vec::with_capacity(sns.len());
            let mut sq_err = 0.0;
            for s in &sns {
                let h = estimate_hurst(*s, scheme.n())?;
                devs.push(studentized_deviation(h, hurst, scheme));
                sq_err += (h - hurst) * (h - hurst);
                hats.push(h);
            }
            let mean_h = stats::mean(&hats);
            let analytic_sn = (-2.0 * hurst * scheme.n() as f64).exp2();
            rows.push(EstimatorRow {
                scheme: *scheme,
                cardinality: scheme.cardinality(true) as usize,
                mean_h,
                se_mean_h: stats::se_mean(&hats),
                bias: mean_h - hurst,
                rmse: (sq_err / hats.len() as f64).sqrt(),
                studentized_variance: stats::variance(&devs),
                se_studentized_variance: stats::se_variance(&devs),
                plugin_bias: estimate_hurst(analytic_sn, scheme.n())? - hurst,
            });
        }
        Ok(rows)
    })??;

    Ok(EstimatorReport {
        meta: ReportMeta::from_config(config),
        hurst_true: hurst,
        sigma_method: sigma_method.to_string(),
        sigma_squared: sigma.value,
        sigma_std_error: sigma.std_error,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::config::{SchemeConfig, SchemeSpec, SCHEMA_VERSION};
    use crate::process::HermiteParams;

    fn config(mode: SampleMode, scheme: SchemeSpec, replications: usize) -> ExperimentConfig {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            kind: ExperimentKind::Estimator,
            params: HermiteParams::new(1, 0.7).unwrap(),
            scheme,
            replications,
            mode,
            master_seed: 31,
            output: None,
        }
    }

    #[test]
    fn plugin_bias_vanishes_to_rounding() {
        let c = config(
            SampleMode::IidDominant,
            SchemeSpec::Single(SchemeConfig::counts(12, 16, 8)),
            50,
        );
        let report = run_estimator_experiment(&c).unwrap();
        assert!(report.rows[0].plugin_bias.abs() < 1e-14);
    }

    #[test]
    fn exact_mode_bias_shrinks_with_resolution() {
        let c = config(
            SampleMode::Exact,
            SchemeSpec::Sweep(vec![
                SchemeConfig::exponents(8, 0.5, 0.45),
                SchemeConfig::exponents(12, 0.5, 0.45),
            ]),
            600,
        );
        let report = run_estimator_experiment(&c).unwrap();
        let b0 = report.rows[0].bias.abs();
        let b1 = report.rows[1].bias.abs();
        assert!(b1 < b0, "bias {b0} -> {b1}");
        assert!(report.rows[1].rmse < report.rows[0].rmse);
    }

    #[test]
    fn studentized_variance_approaches_two_at_iid_scale() {
        let c = config(
            SampleMode::IidDominant,
            SchemeSpec::Single(SchemeConfig::counts(20, 1024, 512)),
            1500,
        );
        let report = run_estimator_experiment(&c).unwrap();
        let row = &report.rows[0];
        assert_eq!(report.sigma_squared, 2.0);
        assert!(
            row.studentized_variance > 1.7 && row.studentized_variance < 2.3,
            "studentized variance {}",
            row.studentized_variance
        );
    }

    #[test]
    fn kind_guard_rejects_other_configs() {
        let mut c = config(
            SampleMode::IidDominant,
            SchemeSpec::Single(SchemeConfig::counts(12, 16, 8)),
            100,
        );
        c.kind = ExperimentKind::Clt;
        assert!(run_estimator_experiment(&c).is_err());
    }
}
