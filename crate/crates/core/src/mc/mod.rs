//! Monte Carlo harness: experiment configs, deterministic seeded runners,
//! distributional distances, and report persistence.
//!
//! An experiment is described by an [`ExperimentConfig`] (TOML or JSON on
//! disk), run by the matching `run_*_experiment` function, and written out
//! as JSON plus a CSV table and two-column plot data files.  Every runner
//! is a pure function of `(config, options)`: replication seeds derive
//! from the master seed by counter, so reports are byte-identical across
//! runs and worker counts.

mod clt;
mod config;
mod distance;
mod estimator;
mod hou_exp;
mod moments;
mod pipeline;
mod remainders;
mod report;
mod runtime;
mod seed;

pub use clt::{
    run_clt_experiment, run_clt_experiment_with, CltOptions, CltPoint, CltReport, PartsSummary,
    RATE_NOTE,
};
pub use config::{
    load_config, save_config, ExperimentConfig, ExperimentKind, SampleMode, SchemeConfig,
    SchemeSpec, SCHEMA_VERSION,
};
pub use distance::{
    distance_report, ks_to_gaussian, w1_empirical_floor, wasserstein1_to_gaussian, DistanceReport,
};
pub use estimator::{
    run_estimator_experiment, run_estimator_experiment_with, EstimatorOptions, EstimatorReport,
    EstimatorRow,
};
pub use hou_exp::{run_hou_experiment, run_hou_experiment_with, HouOptions, HouReport, HouRow};
pub use moments::{
    run_moments_experiment, run_moments_experiment_with, MomentRow, MomentsOptions, MomentsReport,
};
pub use pipeline::{
    build_rescaled_decomposition, par_replications, resolve_sigma, sample_deltas_dmt,
    sample_deltas_exact, try_par_replications, DecompositionOptions, EXACT_LEVEL_CAP,
};
pub use remainders::{
    run_remainders_experiment, run_remainders_experiment_with, RemainderRow, RemaindersOptions,
    RemaindersReport,
};
pub use report::{
    persist_report, read_json, write_csv_table, write_json, write_plot_files, ReportMeta, Tabular,
};
pub use runtime::{resolve_workers, with_workers, WORKERS_ENV};
pub use seed::{mix_seed, replication_rng};

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Report produced by [`run_experiment`], tagged by experiment kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ExperimentOutput {
    Clt(CltReport),
    Estimator(EstimatorReport),
    Remainders(RemaindersReport),
    Hou(HouReport),
    Moments(MomentsReport),
}

impl ExperimentOutput {
    /// Shared metadata of the inner report.
    pub fn meta(&self) -> &ReportMeta {
        match self {
            ExperimentOutput::Clt(r) => &r.meta,
            ExperimentOutput::Estimator(r) => &r.meta,
            ExperimentOutput::Remainders(r) => &r.meta,
            ExperimentOutput::Hou(r) => &r.meta,
            ExperimentOutput::Moments(r) => &r.meta,
        }
    }

    /// Mutable metadata, for stamping a creation time before persisting.
    pub fn meta_mut(&mut self) -> &mut ReportMeta {
        match self {
            ExperimentOutput::Clt(r) => &mut r.meta,
            ExperimentOutput::Estimator(r) => &mut r.meta,
            ExperimentOutput::Remainders(r) => &mut r.meta,
            ExperimentOutput::Hou(r) => &mut r.meta,
            ExperimentOutput::Moments(r) => &mut r.meta,
        }
    }

    /// Writes JSON, CSV, and plot files under `base`; returns the paths.
    pub fn persist(&self, base: &Path) -> Result<Vec<PathBuf>> {
        match self {
            ExperimentOutput::Clt(r) => persist_report(r, base),
            ExperimentOutput::Estimator(r) => persist_report(r, base),
            ExperimentOutput::Remainders(r) => persist_report(r, base),
            ExperimentOutput::Hou(r) => persist_report(r, base),
            ExperimentOutput::Moments(r) => persist_report(r, base),
        }
    }
}

/// Dispatches a config to the runner matching its `kind`, with default
/// runner knobs except for an optional worker-count override.
pub fn run_experiment(config: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentOutput> {
    match config.kind {
        ExperimentKind::Clt => {
            let mut options = CltOptions::default();
            options.workers = workers;
            run_clt_experiment_with(config, &options).map(ExperimentOutput::Clt)
        }
        ExperimentKind::Estimator => {
            let mut options = EstimatorOptions::default();
            options.workers = workers;
            run_estimator_experiment_with(config, &options).map(ExperimentOutput::Estimator)
        }
        ExperimentKind::Remainders => {
            let mut options = RemaindersOptions::default();
            options.workers = workers;
            run_remainders_experiment_with(config, &options).map(ExperimentOutput::Remainders)
        }
        ExperimentKind::Hou => {
            let mut options = HouOptions::default();
            options.workers = workers;
            run_hou_experiment_with(config, &options).map(ExperimentOutput::Hou)
        }
        ExperimentKind::Moments => {
            let mut options = MomentsOptions::default();
            options.workers = workers;
            run_moments_experiment_with(config, &options).map(ExperimentOutput::Moments)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::HermiteParams;

    #[test]
    fn dispatcher_routes_by_kind_and_persists() {
        let config = ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            kind: ExperimentKind::Moments,
            params: HermiteParams::new(1, 0.7).unwrap(),
            scheme: SchemeSpec::Single(SchemeConfig::counts(10, 16, 8)),
            replications: 300,
            mode: SampleMode::IidDominant,
            master_seed: 5,
            output: None,
        };
        let output = run_experiment(&config, Some(2)).unwrap();
        assert_eq!(output.meta().kind, ExperimentKind::Moments);
        assert_eq!(output.meta().created_unix, 0);

        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("out/moments");
        let paths = output.persist(&base).unwrap();
        assert!(paths.iter().any(|p| p.extension().unwrap() == "json"));
        assert!(paths.iter().any(|p| p.extension().unwrap() == "csv"));
    }
}
