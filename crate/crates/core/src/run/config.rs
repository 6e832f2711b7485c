//! Run configuration, read from a single TOML file.
//!
//! Every physical cell parameter must be given explicitly; only universal
//! constants have defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use super::ConfigError;
use crate::cache::{CacheGeometry, ReplacementKind, VulnerableValue};
use crate::cell::{CellParams, WritePresets};
use crate::engine::DeviceParams;
use crate::oracle::OracleConfig;
use crate::pv::{PvConfig, PvModel, PvParam};
use crate::trace::SyntheticSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheSection {
    pub num_sets: usize,
    pub associativity: usize,
    pub block_bytes: usize,
    #[serde(default)]
    pub replacement: ReplacementKind,
}

fn default_sigma() -> f64 {
    PvConfig::default().sigma_rel
}
fn default_truncation() -> f64 {
    PvConfig::default().truncation
}
fn default_affected() -> Vec<PvParam> {
    PvParam::ALL.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvSection {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_sigma")]
    pub sigma_rel: f64,
    #[serde(default = "default_affected")]
    pub affected: Vec<PvParam>,
    /// Defaults to the run seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_truncation")]
    pub truncation: f64,
}

impl Default for PvSection {
    fn default() -> Self {
        Self {
            enabled: false,
            sigma_rel: default_sigma(),
            affected: default_affected(),
            seed: None,
            truncation: default_truncation(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSection {
    /// Trace file, relative paths resolved against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetentionScenario {
    Vulnerable,
    All,
    #[default]
    Both,
}

impl RetentionScenario {
    pub fn vulnerable(self) -> bool {
        matches!(self, Self::Vulnerable | Self::Both)
    }

    pub fn all(self) -> bool {
        matches!(self, Self::All | Self::Both)
    }
}

/// Time unit of the per-unit-time figures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportUnit {
    Ns,
    #[default]
    Us,
    Ms,
    S,
}

impl ReportUnit {
    pub fn seconds(self) -> f64 {
        match self {
            Self::Ns => 1e-9,
            Self::Us => 1e-6,
            Self::Ms => 1e-3,
            Self::S => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Ns => "ns",
            Self::Us => "us",
            Self::Ms => "ms",
            Self::S => "s",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub retention_scenario: RetentionScenario,
    /// Stored value the read current can flip.
    #[serde(default)]
    pub read_disturb_vulnerable: VulnerableValue,
    #[serde(default)]
    pub report_unit: ReportUnit,
    /// Start of the execution window; defaults to the first record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_ns: Option<u64>,
    /// End of the execution window; defaults to the last record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_ns: Option<u64>,
    /// Emit the error probability of every read.
    #[serde(default)]
    pub per_read_log: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cache: CacheSection,
    pub cell: CellParams,
    #[serde(default)]
    pub write: WritePresets,
    #[serde(default)]
    pub pv: PvSection,
    pub trace: TraceSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    /// Directory relative trace paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn invalid(path: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.to_string(),
        reason: reason.into(),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut config = Self::from_toml_str(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    /// Builds a config from a TOML table, deriving `cell.delta` from the
    /// barrier energy and temperature when only those are given.
    pub fn from_table(mut table: Table) -> Result<Self, ConfigError> {
        if let Some(Value::Table(cell)) = table.get_mut("cell") {
            if !cell.contains_key("delta") {
                let num = |v: Option<&Value>| match v {
                    Some(Value::Float(f)) => Some(*f),
                    Some(Value::Integer(i)) => Some(*i as f64),
                    _ => None,
                };
                match (num(cell.get("e_b")), num(cell.get("temperature"))) {
                    (Some(e_b), Some(t)) => {
                        let k = num(cell.get("boltzmann")).unwrap_or(crate::cell::BOLTZMANN);
                        cell.insert("delta".into(), Value::Float(e_b / (k * t)));
                    }
                    _ => {
                        return Err(invalid(
                            "cell.delta",
                            "give either delta or both e_b and temperature",
                        ))
                    }
                }
            }
        }
        let config: RunConfig = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.geometry()?;
        self.cell
            .validate()
            .map_err(|e| invalid("cell", e.to_string()))?;
        self.device()?;
        if self.pv.enabled {
            self.pv_model()?;
        }
        match (&self.trace.file, &self.trace.synthetic) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(invalid("trace", "give exactly one of file or synthetic"))
            }
            (None, Some(spec)) => {
                spec.validate()
                    .map_err(|e| invalid("trace.synthetic", e.to_string()))?;
                if spec.block_bytes != self.cache.block_bytes {
                    return Err(invalid(
                        "trace.synthetic.block_bytes",
                        format!(
                            "{} does not match cache.block_bytes = {}",
                            spec.block_bytes, self.cache.block_bytes
                        ),
                    ));
                }
            }
            (Some(_), None) => {}
        }
        if let (Some(s), Some(e)) = (self.run.start_ns, self.run.end_ns) {
            if e < s {
                return Err(invalid("run.end_ns", "precedes run.start_ns"));
            }
        }
        if let Some(oracle) = &self.oracle {
            oracle
                .validate()
                .map_err(|e| invalid("oracle", e.to_string()))?;
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<CacheGeometry, ConfigError> {
        let g = CacheGeometry {
            num_sets: self.cache.num_sets,
            associativity: self.cache.associativity,
            block_bytes: self.cache.block_bytes,
            replacement: self.cache.replacement,
        };
        g.validate().map_err(|e| invalid("cache", e.to_string()))?;
        Ok(g)
    }

    pub fn device(&self) -> Result<DeviceParams, ConfigError> {
        DeviceParams::new(self.cell.clone(), self.write.clone())
            .map_err(|e| invalid("write", e.to_string()))
    }

    pub fn pv_config(&self) -> PvConfig {
        PvConfig {
            sigma_rel: self.pv.sigma_rel,
            affected: self.pv.affected.iter().copied().collect(),
            seed: self.pv.seed.unwrap_or(self.run.seed),
            truncation: self.pv.truncation,
        }
    }

    pub fn pv_model(&self) -> Result<PvModel, ConfigError> {
        PvModel::new(self.pv_config()).map_err(|e| invalid("pv", e.to_string()))
    }

    /// Trace file path with relative paths resolved against the config file.
    pub fn trace_path(&self) -> Option<PathBuf> {
        self.trace.file.as_ref().map(|f| match &self.base_dir {
            Some(dir) if f.is_relative() => dir.join(f),
            _ => f.clone(),
        })
    }
}

/// Sets a numeric field addressed by a dotted path (`cell.delta`).
pub fn set_numeric(table: &mut Table, path: &str, value: f64) -> Result<(), ConfigError> {
    let not_numeric = || invalid(path, "does not address a numeric field");
    let mut parts = path.split('.').peekable();
    let mut current = table;
    while let Some(key) = parts.next() {
        if parts.peek().is_none() {
            let slot = current.get_mut(key).ok_or_else(not_numeric)?;
            *slot = match slot {
                Value::Integer(_) if value.fract() == 0.0 && value.abs() < 9.0e15 => {
                    Value::Integer(value as i64)
                }
                Value::Integer(_) | Value::Float(_) => Value::Float(value),
                _ => return Err(not_numeric()),
            };
            return Ok(());
        }
        current = match current.get_mut(key) {
            Some(Value::Table(t)) => t,
            _ => return Err(not_numeric()),
        };
    }
    Err(not_numeric())
}
