//! Magnitudes of the remainder parts of the decomposed variation across a
//! resolution sweep.  Chaos mode only: the split needs the kernel form of
//! every selected increment.

use serde::{Deserialize, Serialize};

use crate::chaos::PartitionNoise;
use crate::error::{Error, Result};
use crate::increments::DyadicScheme;
use crate::mc::clt::{summarize_parts, PartsSummary};
use crate::mc::config::{ExperimentConfig, ExperimentKind, SampleMode};
use crate::mc::pipeline::{
    build_rescaled_decomposition, try_par_replications, DecompositionOptions,
};
use crate::mc::report::{ReportMeta, Tabular};
use crate::mc::runtime::with_workers;
use crate::mc::seed::mix_seed;
use crate::stats;

const SALT_POINT: u64 = 0x0004_0000;

/// Runner knobs for the remainder experiment.
#[derive(Debug, Clone, Default)]
pub struct RemaindersOptions {
    pub workers: Option<usize>,
    pub decomposition: DecompositionOptions,
}

/// One sweep point: part magnitudes plus the exact unit-scale masses of the
/// dominant and rest kernels, averaged over anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderRow {
    pub scheme: DyadicScheme,
    pub cardinality: usize,
    pub parts: PartsSummary,
    pub dominant_m2_mean: f64,
    pub rest_m2_mean: f64,
}

/// Remainder sweep report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemaindersReport {
    pub meta: ReportMeta,
    pub rows: Vec<RemainderRow>,
}

impl Tabular for RemaindersReport {
    fn headers(&self) -> Vec<&'static str> {
        vec![
            "n",
            "spacing",
            "cardinality",
            "mean_abs_v1",
            "se_abs_v1",
            "mean_abs_v2",
            "se_abs_v2",
            "mean_abs_cross",
            "se_abs_cross",
            "mean_abs_v3",
            "se_abs_v3",
            "centering_defect",
            "sd_v1",
            "dominant_m2_mean",
            "rest_m2_mean",
        ]
    }

    fn rows(&self) -> Vec<Vec<Option<f64>>> {
        self.rows
            .iter()
            .map(|r| {
                let p = &r.parts;
                vec![
                    Some(r.scheme.n() as f64),
                    Some(r.scheme.spacing() as f64),
                    Some(r.cardinality as f64),
                    Some(p.mean_abs_v1),
                    Some(p.se_abs_v1),
                    Some(p.mean_abs_v2),
                    Some(p.se_abs_v2),
                    Some(p.mean_abs_cross),
                    Some(p.se_abs_cross),
                    Some(p.mean_abs_v3),
                    Some(p.se_abs_v3),
                    Some(p.centering_defect),
                    Some(p.sd_v1),
                    Some(r.dominant_m2_mean),
                    Some(r.rest_m2_mean),
                ]
            })
            .collect()
    }

    fn plots(&self) -> Vec<(&'static str, usize, usize)> {
        vec![
            ("rest-vs-n", 0, 5),
            ("cross-vs-n", 0, 7),
            ("rest-mass-vs-n", 0, 14),
        ]
    }
}

/// Runs a remainder experiment with default runner knobs.
pub fn run_remainders_experiment(config: &ExperimentConfig) -> Result<RemaindersReport> {
    run_remainders_experiment_with(config, &RemaindersOptions::default())
}

/// Runs a remainder experiment; deterministic in `(config, master_seed)`.
pub fn run_remainders_experiment_with(
    config: &ExperimentConfig,
    options: &RemaindersOptions,
) -> Result<RemaindersReport> {
    config.validate()?;
    if config.kind != ExperimentKind::Remainders {
        return Err(Error::Config(format!(
            "remainders runner received a {} config",
            config.kind.as_str()
        )));
    }
    if config.mode != SampleMode::Chaos {
        return Err(Error::Mode(format!(
            "the remainder split exists only in chaos mode, got {}",
            config.mode.as_str()
        )));
    }
    let schemes = config.scheme.to_schemes()?;
    let rows = with_workers(options.workers, || -> Result<Vec<RemainderRow>> {
        let mut rows = Vec::with_capacity(schemes.len());
        for (i, scheme) in schemes.iter().enumerate() {
            let seed = mix_seed(config.master_seed, SALT_POINT + i as u64);
            let (decomposition, partition) =
                build_rescaled_decomposition(scheme, config.params, &options.decomposition)?;
            let parts = try_par_replications(config.replications, seed, |rng| {
                let noise = PartitionNoise::generate(&partition, rng);
                let decomposed = decomposition.evaluate(&noise)?;
                decomposition.vn_parts(&decomposed)
            })?;
            rows.push(RemainderRow {
                scheme: *scheme,
                cardinality: decomposition.len(),
                parts: summarize_parts(&parts),
                dominant_m2_mean: stats::mean(decomposition.dominant_m2()),
                rest_m2_mean: stats::mean(decomposition.rest_m2()),
            });
        }
        Ok(rows)
    })??;

    Ok(RemaindersReport {
        meta: ReportMeta::from_config(config),
        rows,
    })
}
