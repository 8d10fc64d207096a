//! JSON scenario files: loading, validation and conversion to a [`Setup`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::estimators::{VacuumCoupling, WeakDecoyConfig};
use crate::finite::FluctuationParams;
use crate::keyrate::ProtocolParams;
use crate::optimizer::DEFAULT_INTERVAL;
use crate::photonics::EcModel;
use crate::protocol::{AykiMode, Link, Protocol, Setup, TriggerDetector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl LossRange {
    /// `start, start + step, ...` up to and including `stop`.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + self.step * k as f64).collect()
    }
}

/// Measured-data analysis settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// CSV with columns `intensity, j, pulses, detections, errors`, relative
    /// to the configuration file.
    pub data: PathBuf,
    pub protocol: Protocol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub channel: Link,
    pub detector: TriggerDetector,
    pub protocols: Vec<Protocol>,
    pub loss_db: LossRange,
    #[serde(default)]
    pub protocol_params: ProtocolParams,
    #[serde(default = "default_interval")]
    pub mu_interval: (f64, f64),
    #[serde(default)]
    pub weak_decoy: Option<WeakDecoyConfig>,
    #[serde(default)]
    pub ayki_mode: AykiMode,
    #[serde(default)]
    pub passive_coupling: VacuumCoupling,
    /// Present for finite-size runs; absent means asymptotic.
    #[serde(default)]
    pub fluctuation: Option<FluctuationParams>,
    #[serde(default)]
    pub analysis: Option<AnalysisConfig>,
    /// Default output path when `--out` is not given.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_interval() -> (f64, f64) {
    DEFAULT_INTERVAL
}

/// Why a configuration could not be used.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn probability(name: &str, value: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} out of [0,1]")))
    }
}

fn invalid(e: Error) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}

impl ScenarioConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.channel;
        probability("eta_bob", c.eta_bob)?;
        probability("y0b", c.y0b)?;
        probability("e_d", c.e_d)?;
        if !(c.insertion_loss_db >= 0.0 && c.insertion_loss_db.is_finite()) {
            return Err(ConfigError::Invalid("insertion_loss_db must be non-negative".into()));
        }
        match self.detector {
            TriggerDetector::Threshold { eta_a, y0a, .. } => {
                probability("eta_a", eta_a)?;
                probability("y0a", y0a)?;
                if eta_a == 0.0 {
                    return Err(ConfigError::Invalid("eta_a must be positive".into()));
                }
            }
            TriggerDetector::Pnr { .. } => self.detector.validate().map_err(invalid)?,
        }
        if self.protocols.is_empty() {
            return Err(ConfigError::Invalid("protocol list is empty".into()));
        }
        if let TriggerDetector::Pnr { .. } = self.detector {
            if let Some(p) = self.protocols.iter().find(|p| p.needs_threshold()) {
                return Err(ConfigError::Invalid(format!(
                    "protocol '{p}' needs a threshold trigger detector"
                )));
            }
        }
        let l = &self.loss_db;
        if !(l.step > 0.0 && l.step.is_finite()) {
            return Err(ConfigError::Invalid("loss_db.step must be positive".into()));
        }
        if !(l.start >= 0.0 && l.stop >= l.start && l.stop.is_finite()) {
            return Err(ConfigError::Invalid("loss_db needs 0 <= start <= stop".into()));
        }
        let q = self.protocol_params.q;
        if !(q > 0.0 && q <= 1.0) {
            return Err(ConfigError::Invalid("q out of (0,1]".into()));
        }
        self.protocol_params.ec.validate().map_err(invalid)?;
        let (lo, hi) = self.mu_interval;
        if !(lo > 0.0 && hi > lo && hi <= 1.0) {
            return Err(ConfigError::Invalid("mu_interval needs 0 < lo < hi <= 1".into()));
        }
        if let Some(w) = &self.weak_decoy {
            if !(w.nu > 0.0 && w.nu < 1.0) {
                return Err(ConfigError::Invalid("weak_decoy.nu out of (0,1)".into()));
            }
            if !(w.signal_fraction > 0.0 && w.signal_fraction < 1.0) {
                return Err(ConfigError::Invalid("weak_decoy.signal_fraction out of (0,1)".into()));
            }
        }
        if self.protocols.contains(&Protocol::Weak) && self.weak_decoy.is_none() {
            return Err(ConfigError::Invalid("protocol 'weak' needs a weak_decoy block".into()));
        }
        if let Some(fl) = &self.fluctuation {
            fl.validate().map_err(invalid)?;
        }
        Ok(())
    }

    pub fn setup(&self) -> Setup {
        Setup {
            link: self.channel,
            detector: self.detector,
            params: self.protocol_params.clone(),
            weak: self.weak_decoy,
            ayki_mode: self.ayki_mode,
            coupling: self.passive_coupling,
        }
    }

    /// Protocols in output order.
    pub fn sorted_protocols(&self) -> Vec<Protocol> {
        let mut p = self.protocols.clone();
        p.sort_by_key(|p| p.name());
        p.dedup();
        p
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// The baseline scenario without calibration.
    pub fn baseline() -> Self {
        Self {
            channel: Link::baseline(),
            detector: TriggerDetector::baseline(),
            protocols: vec![Protocol::NonDecoy, Protocol::Infinite, Protocol::Ayki, Protocol::Pnr],
            loss_db: LossRange {
                start: 0.0,
                stop: 45.0,
                step: 1.0,
            },
            protocol_params: ProtocolParams {
                q: 0.5,
                ec: EcModel::default(),
            },
            mu_interval: DEFAULT_INTERVAL,
            weak_decoy: None,
            ayki_mode: AykiMode::default(),
            passive_coupling: VacuumCoupling::default(),
            fluctuation: None,
            analysis: None,
            output: None,
            base_dir: PathBuf::from("."),
        }
    }
}

/// Reads and validates a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut cfg = ScenarioConfig::from_json(&text, &path.display().to_string())?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::to_value(ScenarioConfig::baseline()).unwrap()
    }

    fn parse(v: &serde_json::Value) -> Result<ScenarioConfig, ConfigError> {
        ScenarioConfig::from_json(&v.to_string(), "test")
    }

    #[test]
    fn baseline_round_trips() {
        let cfg = parse(&base()).unwrap();
        assert_eq!(cfg.channel, Link::baseline());
        assert!(cfg.fluctuation.is_none());
    }

    #[test]
    fn bad_error_rate() {
        let mut v = base();
        v["channel"]["e_d"] = 1.5.into();
        match parse(&v) {
            Err(ConfigError::Invalid(m)) => assert_eq!(m, "e_d out of [0,1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut v = base();
        v["channel"]["eta_alice"] = 0.1.into();
        let err = parse(&v).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }));
        assert!(err.to_string().contains("eta_alice"));
    }

    #[test]
    fn empty_protocols_and_bad_step() {
        let mut v = base();
        v["protocols"] = serde_json::json!([]);
        assert!(matches!(parse(&v), Err(ConfigError::Invalid(_))));
        let mut v = base();
        v["loss_db"]["step"] = 0.0.into();
        assert!(matches!(parse(&v), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn loss_points_include_stop() {
        let r = LossRange {
            start: 0.0,
            stop: 45.0,
            step: 0.5,
        };
        let p = r.points();
        assert_eq!(p.len(), 91);
        assert_eq!(*p.last().unwrap(), 45.0);
    }

    #[test]
    fn parse_error_has_position() {
        let err = ScenarioConfig::from_json("{\n  \"channel\": ,\n}", "x.json").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
