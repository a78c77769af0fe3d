//! JSON run configurations. Every generator is deterministic; there are no
//! seeds.
//!
//! ```json
//! {
//!   "engine": "lemma2",
//!   "stages": 2000,
//!   "alpha": {"kind": "constant_target", "limit": "1/2", "direction": "increasing", "rate": "1/2"},
//!   "eta": {"kind": "omega", "machine": "default", "length": 8},
//!   "suite": [
//!     {"kind": "constant_target", "limit": "1/3", "direction": "increasing", "rate": "1/2"},
//!     {"kind": "tracker", "start": "7/8", "direction": "decreasing", "lag": 1, "gain": "1/2"}
//!   ]
//! }
//! ```
//!
//! A positional suite plays `γ^{p/2}` at even positions and `δ^{p/2}` at odd
//! ones; entries of the form `{"index": i, "stream": {...}}` name their index
//! and take their side from the stream's direction.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lemma2::Lemma2Config;
use crate::omega::{bundled, OmegaEnumeration, OmegaError, ToyMachine};
use crate::prop3::Prop3Config;
use crate::rational::Rational;
use crate::solovay::Clause;
use crate::stream::{translate_omega, AdversarySuite, ApproxStream, Direction, Stage, StreamError};

pub const DEFAULT_MAX_STAGES: Stage = 100_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("bad configuration: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Omega(#[from] OmegaError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StreamSpec {
    Constant {
        value: Rational,
        direction: Direction,
    },
    ConstantTarget {
        limit: Rational,
        direction: Direction,
        rate: Rational,
    },
    Tracker {
        start: Rational,
        direction: Direction,
        lag: usize,
        gain: Rational,
    },
    Table {
        values: Vec<Rational>,
        direction: Direction,
    },
    /// Toy halting probability of a bundled machine, or of a machine file.
    Omega {
        #[serde(default)]
        machine: Option<String>,
        #[serde(default)]
        machine_file: Option<PathBuf>,
        length: usize,
    },
    /// `omega + x`, checked below 1 at the run's last stage.
    Translate {
        omega: Box<StreamSpec>,
        x: Box<StreamSpec>,
    },
    Sum {
        parts: Vec<StreamSpec>,
    },
}

impl StreamSpec {
    /// Builds the stream; `horizon` is the last stage the run will use and
    /// `base` resolves relative machine files.
    pub fn build(&self, horizon: Stage, base: &Path) -> Result<ApproxStream, ConfigError> {
        Ok(match self {
            StreamSpec::Constant { value, direction } => ApproxStream::constant(value.clone(), *direction),
            StreamSpec::ConstantTarget { limit, direction, rate } => {
                ApproxStream::constant_target(limit.clone(), *direction, rate.clone())?
            }
            StreamSpec::Tracker {
                start,
                direction,
                lag,
                gain,
            } => ApproxStream::tracker(start.clone(), *direction, *lag, gain.clone())?,
            StreamSpec::Table { values, direction } => ApproxStream::table(values.clone(), *direction)?,
            StreamSpec::Omega {
                machine,
                machine_file,
                length,
            } => {
                let m = match (machine, machine_file) {
                    (Some(name), None) => bundled(name)?,
                    (None, Some(path)) => {
                        let path = base.join(path);
                        let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io { path, source })?;
                        ToyMachine::parse(&text)?
                    }
                    _ => {
                        return Err(ConfigError::Invalid(
                            "omega needs exactly one of `machine` and `machine_file`".into(),
                        ))
                    }
                };
                ApproxStream::omega(OmegaEnumeration::new(m, *length)?)
            }
            StreamSpec::Translate { omega, x } => {
                translate_omega(omega.build(horizon, base)?, x.build(horizon, base)?, horizon)?
            }
            StreamSpec::Sum { parts } => {
                let built = parts.iter().map(|p| p.build(horizon, base)).collect::<Result<_, _>>()?;
                ApproxStream::sum(built)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SuiteEntrySpec {
    Indexed { index: usize, stream: StreamSpec },
    Positional(StreamSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SuiteSpec {
    /// The standard eight-entry suite around the given Ω stream.
    Standard {
        standard: StreamSpec,
    },
    Entries(Vec<SuiteEntrySpec>),
}

impl Default for SuiteSpec {
    fn default() -> Self {
        SuiteSpec::Entries(Vec::new())
    }
}

impl SuiteSpec {
    pub fn build(&self, horizon: Stage, base: &Path) -> Result<AdversarySuite, ConfigError> {
        match self {
            SuiteSpec::Standard { standard } => Ok(AdversarySuite::standard(standard.build(horizon, base)?)?),
            SuiteSpec::Entries(entries) => {
                let positional = entries
                    .iter()
                    .filter(|e| matches!(e, SuiteEntrySpec::Positional(_)))
                    .count();
                if positional != 0 && positional != entries.len() {
                    return Err(ConfigError::Invalid(
                        "suite entries must be all positional or all indexed".into(),
                    ));
                }
                if positional > 0 {
                    let streams = entries
                        .iter()
                        .map(|e| match e {
                            SuiteEntrySpec::Positional(s) => s.build(horizon, base),
                            SuiteEntrySpec::Indexed { .. } => unreachable!(),
                        })
                        .collect::<Result<_, _>>()?;
                    return Ok(AdversarySuite::from_positions(streams)?);
                }
                let mut suite = AdversarySuite::new();
                for e in entries {
                    if let SuiteEntrySpec::Indexed { index, stream } = e {
                        suite.push(*index, stream.build(horizon, base)?)?;
                    }
                }
                Ok(suite)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Lemma2,
    Prop3,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub trace: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
    pub state: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub engine: EngineKind,
    pub stages: Stage,
    #[serde(default)]
    pub alpha: Option<StreamSpec>,
    #[serde(default)]
    pub eta: Option<StreamSpec>,
    #[serde(default)]
    pub suite: SuiteSpec,
    #[serde(default)]
    pub max_stages: Option<Stage>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let cap = self.max_stages.unwrap_or(DEFAULT_MAX_STAGES);
        if self.stages > cap {
            return Err(ConfigError::Invalid(format!(
                "stages = {} exceeds the cap {cap}",
                self.stages
            )));
        }
        match self.engine {
            EngineKind::Lemma2 => {
                if self.stages < 1 {
                    return Err(ConfigError::Invalid("lemma2 needs at least one stage".into()));
                }
                if self.alpha.is_none() || self.eta.is_none() {
                    return Err(ConfigError::Invalid("lemma2 needs `alpha` and `eta`".into()));
                }
            }
            EngineKind::Prop3 => {
                if self.alpha.is_some() || self.eta.is_some() {
                    return Err(ConfigError::Invalid(
                        "prop3 builds alpha and beta itself; drop `alpha` and `eta`".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn lemma2(&self, base: &Path) -> Result<Lemma2Config, ConfigError> {
        let missing = || ConfigError::Invalid("lemma2 needs `alpha` and `eta`".into());
        Ok(Lemma2Config {
            alpha: self.alpha.as_ref().ok_or_else(missing)?.build(self.stages, base)?,
            eta: self.eta.as_ref().ok_or_else(missing)?.build(self.stages, base)?,
            suite: self.suite.build(self.stages, base)?,
            stages: self.stages,
        })
    }

    pub fn prop3(&self, base: &Path) -> Result<Prop3Config, ConfigError> {
        Ok(Prop3Config {
            suite: self.suite.build(self.stages, base)?,
            stages: self.stages,
        })
    }
}

/// Input of `solovay check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolovayCheckConfig {
    pub alpha: StreamSpec,
    pub beta: StreamSpec,
    pub q: Rational,
    pub clause: Clause,
    pub stages: Stage,
    #[serde(default)]
    pub horizon: Option<Stage>,
}

/// Input of `solovay speedup`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedupConfig {
    pub alpha: StreamSpec,
    pub beta: StreamSpec,
    pub p: Rational,
    pub stages: Stage,
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}
