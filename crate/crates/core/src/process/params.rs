//! Process parameters and sampled paths.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Order and self-similarity index of the target process.
///
/// The kernel exponent `alpha = 1/2 + (1-H)/q` drives every quadrature rule
/// in this module; it lives here so all call sites agree on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteParams {
    pub q: usize,
    pub hurst: f64,
}

impl HermiteParams {
    pub fn new(q: usize, hurst: f64) -> Result<Self> {
        let params = HermiteParams { q, hurst };
        params.validate()?;
        Ok(params)
    }

    /// Re-checks the invariants; call after deserializing.
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::InvalidParams("order q must be at least 1".into()));
        }
        if !(self.hurst > 0.5 && self.hurst < 1.0) {
            return Err(Error::InvalidParams(format!(
                "Hurst index must lie in (1/2, 1), got {}",
                self.hurst
            )));
        }
        Ok(())
    }

    /// Kernel singularity exponent `1/2 + (1-H)/q`, always in (1/2, 1).
    pub fn alpha(&self) -> f64 {
        0.5 + (1.0 - self.hurst) / self.q as f64
    }
}

/// How a path was produced; stored with the path so downstream statistics can
/// refuse data from the wrong pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimMethod {
    GaussianExact,
    Chaos,
    DmtSum,
}

impl fmt::Display for SimMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SimMethod::GaussianExact => "gaussian-exact",
            SimMethod::Chaos => "chaos",
            SimMethod::DmtSum => "dmt-sum",
        };
        f.write_str(name)
    }
}

/// Values of one process realization at a finite ordered set of times.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    times: Vec<f64>,
    values: Vec<f64>,
    method: SimMethod,
    params: HermiteParams,
    seed: u64,
}

/// Sidecar metadata persisted next to the CSV values.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PathSidecar {
    method: SimMethod,
    params: HermiteParams,
    seed: u64,
}

impl SamplePath {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        method: SimMethod,
        params: HermiteParams,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        if times.len() != values.len() {
            return Err(Error::InvalidParams(format!(
                "times ({}) and values ({}) differ in length",
                times.len(),
                values.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::EmptySelection("path has no time points".into()));
        }
        if times[0] < 0.0 {
            return Err(Error::InvalidParams("times must be nonnegative".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "times must be strictly increasing".into(),
            ));
        }
        if times[0] == 0.0 && values[0] != 0.0 {
            return Err(Error::InvalidParams(
                "value at time 0 must be 0".into(),
            ));
        }
        Ok(SamplePath {
            times,
            values,
            method,
            params,
            seed,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn method(&self) -> SimMethod {
        self.method
    }

    pub fn params(&self) -> HermiteParams {
        self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Value at an exactly matching time point.  Times in this crate are
    /// dyadic rationals, representable without rounding, so exact comparison
    /// is the intended lookup; near-misses are treated as absent.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.times
            .iter()
            .position(|&s| s == t)
            .map(|i| self.values[i])
    }

    /// Sidecar path convention: the CSV's extension replaced by `json`.
    pub fn sidecar_path(csv_path: &Path) -> PathBuf {
        csv_path.with_extension("json")
    }

    /// Writes `time,value` rows plus the JSON sidecar holding method, params,
    /// and seed.  Floats use the shortest round-trip representation.
    pub fn write_csv(&self, csv_path: &Path) -> Result<()> {
        let mut body = String::from("time,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            body.push_str(&format!("{t},{v}\n"));
        }
        std::fs::write(csv_path, body)?;
        let sidecar = PathSidecar {
            method: self.method,
            params: self.params,
            seed: self.seed,
        };
        let json = serde_json::to_string_pretty(&sidecar)
            .map_err(|e| Error::Format(format!("sidecar serialization failed: {e}")))?;
        std::fs::write(Self::sidecar_path(csv_path), json)?;
        Ok(())
    }

    /// Reads a CSV written by [`Self::write_csv`] together with its sidecar.
    pub fn read_csv(csv_path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(csv_path)?;
        let mut lines = body.lines();
        match lines.next() {
            Some("time,value") => {}
            other => {
                return Err(Error::Format(format!(
                    "expected header 'time,value', got {other:?}"
                )))
            }
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (t, v) = line.split_once(',').ok_or_else(|| {
                Error::Format(format!("line {}: expected 'time,value'", lineno + 2))
            })?;
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| {
                    Error::Format(format!("line {}: bad {what} '{s}': {e}", lineno + 2))
                })
            };
            times.push(parse(t, "time")?);
            values.push(parse(v, "value")?);
        }
        let sidecar_raw = std::fs::read_to_string(Self::sidecar_path(csv_path))?;
        let sidecar: PathSidecar = serde_json::from_str(&sidecar_raw)
            .map_err(|e| Error::Format(format!("sidecar parse failed: {e}")))?;
        SamplePath::new(times, values, sidecar.method, sidecar.params, sidecar.seed)
    }
}
