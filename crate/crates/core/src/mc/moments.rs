//! Second and fourth moments of the dominant increment law across a sweep,
//! with the spacing-to-infinity extrapolation of the fourth moment and an
//! independent oracle for it.
//!
//! At unit scale the dominant law converges, as the spacing grows, to the
//! law of the process at time one; its moment deficit decays like
//! `spacing^(-2(1-H)/q)`.  Regressing the exact finite-spacing moment
//! ratios on that power and reading the intercept removes the truncation
//! bias without trusting any single resolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::increments::{DominantConfig, DominantLaw, DyadicScheme};
use crate::mc::config::{ExperimentConfig, ExperimentKind, SampleMode};
use crate::mc::pipeline::{par_replications, sample_deltas_dmt, sample_deltas_exact};
use crate::mc::report::{ReportMeta, Tabular};
use crate::mc::runtime::with_workers;
use crate::mc::seed::mix_seed;
use crate::quadvar::{asymptotic_variance, VarianceMethod};
use crate::stats;

const SALT_POINT: u64 = 0x0006_0000;

/// Runner knobs for the moments experiment.
#[derive(Debug, Clone)]
pub struct MomentsOptions {
    pub workers: Option<usize>,
    pub dominant: DominantConfig,
    pub dmt_length: usize,
}

impl Default for MomentsOptions {
    fn default() -> Self {
        MomentsOptions {
            workers: None,
            dominant: DominantConfig {
                subdivisions: 16,
                ..DominantConfig::default()
            },
            dmt_length: 512,
        }
    }
}

/// One sweep point: empirical unit-scale moments with exact counterparts
/// when the law admits them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub scheme: DyadicScheme,
    pub m2_hat: f64,
    pub se_m2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m2_exact: Option<f64>,
    pub m4_hat: f64,
    pub se_m4: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m4_exact: Option<f64>,
    /// Exact `m4 / m2^2`, the scale-free fourth moment of the law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_exact: Option<f64>,
}

/// Moment sweep report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsReport {
    pub meta: ReportMeta,
    /// Power of the spacing used as the extrapolation regressor.
    pub deficit_exponent: f64,
    pub rows: Vec<MomentRow>,
    /// Intercept of the exact moment ratios at infinite spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrapolated_fourth: Option<f64>,
    /// Independent limit of the normalized fourth moment, from the
    /// partial-sum construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_fourth: Option<f64>,
}

impl Tabular for MomentsReport {
    fn headers(&self) -> Vec<&'static str> {
        vec![
            "n",
            "spacing",
            "m2_hat",
            "se_m2",
            "m2_exact",
            "m4_hat",
            "se_m4",
            "m4_exact",
            "ratio_exact",
        ]
    }

    fn rows(&self) -> Vec<Vec<Option<f64>>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    Some(r.scheme.n() as f64),
                    Some(r.scheme.spacing() as f64),
                    Some(r.m2_hat),
                    Some(r.se_m2),
                    r.m2_exact,
                    Some(r.m4_hat),
                    Some(r.se_m4),
                    r.m4_exact,
                    r.ratio_exact,
                ]
            })
            .collect()
    }

    fn plots(&self) -> Vec<(&'static str, usize, usize)> {
        vec![("m2-vs-spacing", 1, 2), ("ratio-vs-spacing", 1, 8)]
    }
}

fn law_row(
    scheme: &DyadicScheme,
    config: &ExperimentConfig,
    options: &MomentsOptions,
    seed: u64,
) -> Result<MomentRow> {
    let law = DominantLaw::build(scheme, config.params, &options.dominant)?;
    let xs = par_replications(config.replications, seed, |rng| law.draw_unit(rng));
    let m2_exact = law.second_moment()?;
    let m4_exact = law.fourth_moment().ok();
    Ok(MomentRow {
        scheme: *scheme,
        m2_hat: stats::raw_moment(&xs, 2),
        se_m2: stats::se_raw_moment(&xs, 2),
        m2_exact: Some(m2_exact),
        m4_hat: stats::raw_moment(&xs, 4),
        se_m4: stats::se_raw_moment(&xs, 4),
        m4_exact,
        ratio_exact: m4_exact.map(|m4| m4 / (m2_exact * m2_exact)),
    })
}

fn pooled_row(
    scheme: &DyadicScheme,
    config: &ExperimentConfig,
    options: &MomentsOptions,
    seed: u64,
) -> Result<MomentRow> {
    let reps = match config.mode {
        SampleMode::Exact => {
            sample_deltas_exact(scheme, config.params, config.replications, seed)?
        }
        _ => sample_deltas_dmt(
            scheme,
            config.params,
            options.dmt_length,
            config.replications,
            seed,
        )?,
    };
    let scale = (scheme.n() as f64 * config.params.hurst).exp2();
    let pooled: Vec<f64> = reps
        .iter()
        .flat_map(|deltas| deltas.iter().map(|d| scale * d))
        .collect();
    let exact_known = config.mode == SampleMode::Exact;
    Ok(MomentRow {
        scheme: *scheme,
        m2_hat: stats::raw_moment(&pooled, 2),
        se_m2: stats::se_raw_moment(&pooled, 2),
        m2_exact: exact_known.then_some(1.0),
        m4_hat: stats::raw_moment(&pooled, 4),
        se_m4: stats::se_raw_moment(&pooled, 4),
        m4_exact: exact_known.then_some(3.0),
        ratio_exact: None,
    })
}

/// Runs a moments experiment with default runner knobs.
pub fn run_moments_experiment(config: &ExperimentConfig) -> Result<MomentsReport> {
    run_moments_experiment_with(config, &MomentsOptions::default())
}

/// Runs a moments experiment; deterministic in `(config, master_seed)`.
pub fn run_moments_experiment_with(
    config: &ExperimentConfig,
    options: &MomentsOptions,
) -> Result<MomentsReport> {
    config.validate()?;
    if config.kind != ExperimentKind::Moments {
        return Err(Error::Config(format!(
            "moments runner received a {} config",
            config.kind.as_str()
        )));
    }
    let schemes = config.scheme.to_schemes()?;
    let params = config.params;
    let deficit_exponent = 2.0 * (1.0 - params.hurst) / params.q as f64;
    let rows = with_workers(options.workers, || -> Result<Vec<MomentRow>> {
        let mut rows = Vec::with_capacity(schemes.len());
        for (i, scheme) in schemes.iter().enumerate() {
            let seed = mix_seed(config.master_seed, SALT_POINT + i as u64);
            let row = match config.mode {
                SampleMode::IidDominant | SampleMode::Chaos => {
                    law_row(scheme, config, options, seed)?
                }
                SampleMode::Exact | SampleMode::Dmt => {
                    pooled_row(scheme, config, options, seed)?
                }
            };
            rows.push(row);
        }
        Ok(rows)
    })??;

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in &rows {
        if let Some(r) = row.ratio_exact {
            xs.push((row.scheme.spacing() as f64).powf(-deficit_exponent));
            ys.push(r);
        }
    }
    let distinct = xs.windows(2).any(|w| w[0] != w[1]);
    let extrapolated_fourth = if xs.len() >= 2 && distinct {
        stats::ols_line(&xs, &ys).ok().map(|(intercept, _)| intercept)
    } else {
        None
    };

    let oracle_fourth = match params.q {
        1 => Some(3.0),
        2 => Some(
            asymptotic_variance(params, VarianceMethod::DmtLimit { n: 1024 }, 0, 0)?.value + 1.0,
        ),
        _ => None,
    };

    Ok(MomentsReport {
        meta: ReportMeta::from_config(config),
        deficit_exponent,
        rows,
        extrapolated_fourth,
        oracle_fourth,
    })
}
