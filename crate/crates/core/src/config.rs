//! JSON run configuration.
//!
//! ```json
//! {
//!   "L": 6, "g": 1.0, "model": "bond",
//!   "bonds": [
//!     {"kind": "constant", "amplitude": 0.1},
//!     {"kind": "cosine", "amplitude": 0.1, "frequency": 2.0, "phase": 0.0},
//!     {"kind": "bessel_controlled", "amplitude": 0.1, "frequency": 2.0, "x1": 2.0, "x2": 2.84787695}
//!   ],
//!   "initial": "uuuuud",
//!   "dt": 0.0157, "t_final": 1000.0, "record_stride": 10,
//!   "scheme": "commutator_free4"
//! }
//! ```
//!
//! The locally driven chain uses `"model": "local"` with `"lambda0"` and
//! `"local_drives": [{"site", "epsilon", "nu"}]` instead of `"bonds"`.
//! Times are in units of `1/g`. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::evolution::Scheme;
use crate::floquet::control::{DEFAULT_X1, DEFAULT_X2};
use crate::hilbert::Spin;
use crate::model::{DriveSchedule, LatticeConfig, LocalDrive, Model};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Bond,
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BondKind {
    Constant,
    Cosine,
    BesselControlled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BondSpec {
    pub kind: BondKind,
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x2: Option<f64>,
}

impl BondSpec {
    fn to_schedule(&self, index: usize) -> Result<DriveSchedule> {
        let frequency = || {
            self.frequency.ok_or_else(|| Error::config(format!("bond {index}: {:?} needs a frequency", self.kind)))
        };
        let stray = |name: &str, present: bool| {
            if present {
                Err(Error::config(format!("bond {index}: key {name:?} does not apply to {:?}", self.kind)))
            } else {
                Ok(())
            }
        };
        match self.kind {
            BondKind::Constant => {
                stray("frequency", self.frequency.is_some())?;
                stray("phase", self.phase.is_some())?;
                stray("x1", self.x1.is_some() || self.x2.is_some())?;
                Ok(DriveSchedule::constant(self.amplitude))
            }
            BondKind::Cosine => {
                stray("x1", self.x1.is_some() || self.x2.is_some())?;
                Ok(DriveSchedule::Cosine {
                    amplitude: self.amplitude,
                    frequency: frequency()?,
                    phase: self.phase.unwrap_or(0.0),
                })
            }
            BondKind::BesselControlled => {
                stray("phase", self.phase.is_some())?;
                Ok(DriveSchedule::BesselControlled {
                    base: self.amplitude,
                    x1: self.x1.unwrap_or(DEFAULT_X1),
                    x2: self.x2.unwrap_or(DEFAULT_X2),
                    omega: frequency()?,
                })
            }
        }
    }

    fn from_schedule(schedule: &DriveSchedule) -> Self {
        let mut spec =
            BondSpec { kind: BondKind::Constant, amplitude: 0.0, frequency: None, phase: None, x1: None, x2: None };
        match *schedule {
            DriveSchedule::Constant { value } => spec.amplitude = value,
            DriveSchedule::Cosine { amplitude, frequency, phase } => {
                spec.kind = BondKind::Cosine;
                spec.amplitude = amplitude;
                spec.frequency = Some(frequency);
                spec.phase = (phase != 0.0).then_some(phase);
            }
            DriveSchedule::BesselControlled { base, x1, x2, omega } => {
                spec.kind = BondKind::BesselControlled;
                spec.amplitude = base;
                spec.frequency = Some(omega);
                spec.x1 = Some(x1);
                spec.x2 = Some(x2);
            }
        }
        spec
    }
}

/// Integration parameters, in units of `1/g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
    #[serde(default)]
    pub scheme: Scheme,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "L")]
    pub sites: usize,
    pub g: f64,
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bonds: Vec<BondSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub local_drives: Vec<LocalDrive>,
    pub initial: String,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    /// `"commutator_free4"` (default) or `"midpoint"`.
    #[serde(default)]
    pub scheme: Scheme,
}

fn default_stride() -> usize {
    1
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_parts(config: &LatticeConfig, run: &RunParams) -> Self {
        let (model, bonds, lambda0, local_drives) = match &config.model {
            Model::BondDriven { bonds } => {
                (ModelKind::Bond, bonds.iter().map(BondSpec::from_schedule).collect(), None, Vec::new())
            }
            Model::LocalDriven { lambda0, drives } => (ModelKind::Local, Vec::new(), Some(*lambda0), drives.clone()),
        };
        Self {
            sites: config.sites,
            g: config.g,
            model,
            bonds,
            lambda0,
            local_drives,
            initial: Spin::format_chain(&config.initial),
            dt: run.dt,
            t_final: run.t_final,
            record_stride: run.record_stride,
            scheme: run.scheme,
        }
    }

    pub fn lattice(&self) -> Result<LatticeConfig> {
        let model = match self.model {
            ModelKind::Bond => {
                if self.lambda0.is_some() || !self.local_drives.is_empty() {
                    return Err(Error::config("bond model takes no lambda0 or local_drives"));
                }
                let bonds = self
                    .bonds
                    .iter()
                    .enumerate()
                    .map(|(i, b)| b.to_schedule(i + 1))
                    .collect::<Result<Vec<_>>>()?;
                Model::BondDriven { bonds }
            }
            ModelKind::Local => {
                if !self.bonds.is_empty() {
                    return Err(Error::config("local model takes no bonds"));
                }
                let lambda0 = self.lambda0.ok_or_else(|| Error::config("local model needs lambda0"))?;
                Model::LocalDriven { lambda0, drives: self.local_drives.clone() }
            }
        };
        LatticeConfig::new(self.sites, self.g, model, Spin::parse_chain(&self.initial)?)
    }

    pub fn run_params(&self) -> Result<RunParams> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt) {
            return Err(Error::config(format!("t_final {} must be at least dt {}", self.t_final, self.dt)));
        }
        if self.record_stride == 0 {
            return Err(Error::config("record_stride must be at least 1"));
        }
        Ok(RunParams { dt: self.dt, t_final: self.t_final, record_stride: self.record_stride, scheme: self.scheme })
    }

    pub fn into_parts(&self) -> Result<(LatticeConfig, RunParams)> {
        Ok((self.lattice()?, self.run_params()?))
    }

    /// Applies `key=value` overrides. Keys are dotted paths into the JSON
    /// document (`bonds.2.frequency`, `local_drives.0.epsilon`); values are
    /// parsed as JSON and fall back to plain strings.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut doc = serde_json::to_value(self).expect("config serializes");
        for item in overrides {
            let (path, value) = parse_override(item.as_ref())?;
            set_path(&mut doc, &path, value)?;
        }
        serde_json::from_value(doc).map_err(|e| Error::config(format!("override: {e}")))
    }
}

/// Splits `key=value` into a dotted path and a JSON value.
pub fn parse_override(item: &str) -> Result<(Vec<String>, Value)> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override {item:?} is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::config(format!("override {item:?} has an empty key")));
    }
    let raw = raw.trim();
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.split('.').map(str::to_string).collect(), value))
}

fn set_path(doc: &mut Value, path: &[String], value: Value) -> Result<()> {
    let mut node = doc;
    for (depth, key) in path.iter().enumerate() {
        let last = depth + 1 == path.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(key.clone(), value);
                    return Ok(());
                }
                map.entry(key.clone()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = key
                    .parse()
                    .map_err(|_| Error::config(format!("override path {}: {key:?} is not an index", path.join("."))))?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| {
                    Error::config(format!("override path {}: index {idx} out of range ({len})", path.join(".")))
                })?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(Error::config(format!("override path {} does not name a field", path.join(".")))),
        };
    }
    Err(Error::config("empty override path"))
}
