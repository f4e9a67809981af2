//! Experiment configuration: schema, validation, and file round-trips.
//!
//! Configs live in TOML or JSON files carrying a `schema_version` so old
//! files fail loudly instead of silently acquiring new defaults.  A scheme
//! is given either by exponents (`beta`, `gamma`) or by direct counts
//! (`spacing`, `cardinality`); sweeps are lists of such entries growing in
//! resolution or, at fixed resolution, in anchor count.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::increments::DyadicScheme;
use crate::process::HermiteParams;

/// Version written by this library; loading any other version is an error.
pub const SCHEMA_VERSION: u32 = 1;

/// What the experiment measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Distance of the normalized variation to its Gaussian limit.
    Clt,
    /// Bias, RMSE, and studentized deviation of the Hurst estimator.
    Estimator,
    /// Magnitudes of the remainder parts of the decomposed variation.
    Remainders,
    /// The Langevin solution driven by the process, against its driver.
    Hou,
    /// Second and fourth moments of the dominant increment law.
    Moments,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Clt => "clt",
            ExperimentKind::Estimator => "estimator",
            ExperimentKind::Remainders => "remainders",
            ExperimentKind::Hou => "hou",
            ExperimentKind::Moments => "moments",
        }
    }
}

/// How replications are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Full-grid Gaussian paths (order 1 only).
    Exact,
    /// Kernel-discretized increments with the dominant/rest split.
    Chaos,
    /// Normalized Hermite partial sums of a long-memory Gaussian sequence.
    Dmt,
    /// Independent draws from the dominant-part law alone.
    IidDominant,
}

impl SampleMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SampleMode::Exact => "exact",
            SampleMode::Chaos => "chaos",
            SampleMode::Dmt => "dmt",
            SampleMode::IidDominant => "iid-dominant",
        }
    }
}

/// One scheme entry: exponents or direct counts, never both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cardinality: Option<u64>,
}

impl SchemeConfig {
    pub fn exponents(n: u32, beta: f64, gamma: f64) -> Self {
        SchemeConfig {
            n,
            beta: Some(beta),
            gamma: Some(gamma),
            spacing: None,
            cardinality: None,
        }
    }

    pub fn counts(n: u32, spacing: u64, cardinality: u64) -> Self {
        SchemeConfig {
            n,
            beta: None,
            gamma: None,
            spacing: Some(spacing),
            cardinality: Some(cardinality),
        }
    }

    pub fn to_scheme(&self) -> Result<DyadicScheme> {
        match (self.beta, self.gamma, self.spacing, self.cardinality) {
            (Some(beta), Some(gamma), None, None) => DyadicScheme::new(self.n, beta, gamma),
            (None, None, Some(spacing), Some(cardinality)) => {
                DyadicScheme::with_counts(self.n, spacing, cardinality)
            }
            _ => Err(Error::Config(
                "scheme entry needs either beta and gamma or spacing and cardinality".into(),
            )),
        }
    }
}

/// A single scheme or a sweep over several resolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemeSpec {
    Single(SchemeConfig),
    Sweep(Vec<SchemeConfig>),
}

impl SchemeSpec {
    pub fn entries(&self) -> &[SchemeConfig] {
        match self {
            SchemeSpec::Single(one) => std::slice::from_ref(one),
            SchemeSpec::Sweep(list) => list,
        }
    }

    pub fn to_schemes(&self) -> Result<Vec<DyadicScheme>> {
        self.entries().iter().map(SchemeConfig::to_scheme).collect()
    }
}

/// Full description of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    pub params: HermiteParams,
    pub scheme: SchemeSpec,
    pub replications: usize,
    pub mode: SampleMode,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Checks every cross-field invariant; call after construction or load.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {}, this library writes {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        self.params.validate()?;
        let schemes = self.scheme.to_schemes()?;
        if schemes.is_empty() {
            return Err(Error::Config("scheme sweep must not be empty".into()));
        }
        for pair in schemes.windows(2) {
            let key =
                |s: &DyadicScheme| (s.n(), s.cardinality(true), s.spacing());
            if key(&pair[1]) <= key(&pair[0]) {
                return Err(Error::Config(format!(
                    "sweep entries must grow in resolution or cardinality, got \
                     n = {} with {} anchors after n = {} with {}",
                    pair[1].n(),
                    pair[1].cardinality(true),
                    pair[0].n(),
                    pair[0].cardinality(true)
                )));
            }
        }
        let needs_distances = matches!(self.kind, ExperimentKind::Clt | ExperimentKind::Hou);
        let min = if needs_distances { 100 } else { 2 };
        if self.replications < min {
            return Err(Error::Config(format!(
                "{} experiments need at least {min} replications, got {}",
                self.kind.as_str(),
                self.replications
            )));
        }
        Ok(())
    }
}

fn extension_of(path: &Path) -> Result<&str> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => Ok("toml"),
        Some("json") => Ok("json"),
        _ => Err(Error::Format(format!(
            "config files must end in .toml or .json, got {}",
            path.display()
        ))),
    }
}

/// Reads and validates a config from a TOML or JSON file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let config: ExperimentConfig = match extension_of(path)? {
        "toml" => toml::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?,
        _ => serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?,
    };
    config.validate()?;
    Ok(config)
}

/// Writes a config next to the reports it will produce.
pub fn save_config(config: &ExperimentConfig, path: &Path) -> Result<()> {
    let text = match extension_of(path)? {
        "toml" => toml::to_string_pretty(config)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?,
        _ => {
            let mut s = serde_json::to_string_pretty(config)
                .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            s.push('\n');
            s
        }
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_config() -> ExperimentConfig {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            kind: ExperimentKind::Clt,
            params: HermiteParams::new(1, 0.7).unwrap(),
            scheme: SchemeSpec::Sweep(vec![
                SchemeConfig::counts(20, 1024, 32),
                SchemeConfig::counts(20, 1024, 128),
            ]),
            replications: 400,
            mode: SampleMode::IidDominant,
            master_seed: 99,
            output: None,
        }
    }

    #[test]
    fn toml_and_json_round_trips_are_identities() {
        let dir = tempfile::tempdir().unwrap();
        let config = sample_config();
        for name in ["c.toml", "c.json"] {
            let path = dir.path().join(name);
            save_config(&config, &path).unwrap();
            let back = load_config(&path).unwrap();
            assert_eq!(back, config, "{name}");
        }
    }

    #[test]
    fn sweeps_must_increase_and_counts_must_be_complete() {
        let mut config = sample_config();
        config.scheme = SchemeSpec::Sweep(vec![
            SchemeConfig::exponents(10, 0.5, 0.45),
            SchemeConfig::exponents(10, 0.5, 0.45),
        ]);
        assert!(config.validate().is_err());

        config.scheme = SchemeSpec::Single(SchemeConfig {
            n: 10,
            beta: Some(0.5),
            gamma: None,
            spacing: None,
            cardinality: None,
        });
        assert!(config.validate().is_err());
    }

    #[test]
    fn distance_experiments_demand_enough_replications() {
        let mut config = sample_config();
        config.replications = 99;
        assert!(config.validate().is_err());
        config.kind = ExperimentKind::Moments;
        config.validate().unwrap();
        config.replications = 1;
        assert!(config.validate().is_err());
    }

    #[test]
    fn malformed_files_name_the_problem() {
        let dir = tempfile::tempdir().unwrap();

        let missing = dir.path().join("missing.toml");
        std::fs::write(&missing, "schema_version = 1\nkind = \"clt\"\n").unwrap();
        let err = load_config(&missing).unwrap_err().to_string();
        assert!(err.contains("params") || err.contains("missing"), "{err}");

        let unknown_kind = dir.path().join("kind.json");
        std::fs::write(
            &unknown_kind,
            serde_json::to_string(&sample_config())
                .unwrap()
                .replace("\"clt\"", "\"bogus\""),
        )
        .unwrap();
        let err = load_config(&unknown_kind).unwrap_err().to_string();
        assert!(err.contains("expected one of") || err.contains("variant"), "{err}");

        let unknown_field = dir.path().join("extra.json");
        let mut v: serde_json::Value =
            serde_json::to_value(&sample_config()).unwrap();
        v.as_object_mut()
            .unwrap()
            .insert("surprise".into(), 1.into());
        std::fs::write(&unknown_field, serde_json::to_string(&v).unwrap()).unwrap();
        assert!(load_config(&unknown_field).is_err());

        let wrong_ext = dir.path().join("config.yaml");
        std::fs::write(&wrong_ext, "x").unwrap();
        assert!(load_config(&wrong_ext).is_err());
    }

    #[test]
    fn schema_version_gate_rejects_future_files() {
        let mut config = sample_config();
        config.schema_version = 2;
        assert!(config.validate().is_err());
    }
}
