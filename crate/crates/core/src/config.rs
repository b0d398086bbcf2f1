//! JSON scene files and the `key=value` override whitelist.
//!
//! ```json
//! {
//!   "chirp":      { "center_freq_hz": 24e9, "bandwidth_hz": 2e9, "sweep_time_s": 1e-3,
//!                   "sample_rate_hz": 1e6, "range_bias_m": 0.0 },
//!   "scene":      { "max_range_m": 8.0, "noise_amplitude": 0.0, "rng_seed": 1,
//!                   "walls": [ { "id": "back_wall", "range_m": 6.0,
//!                                "material": { "name": "lab_wall", "reflectivity": 0.05, "transmissivity": 0.7 } } ],
//!                   "scatterers": [ { "id": "human", "range_m": 2.0, "kind": "human",
//!                                     "material": { "name": "human", "reflectivity": 0.08, "transmissivity": 0.3 } } ] },
//!   "classifier": { "bands": { "infrastructure_max": 1.149, "human_max": 3.758 }, "min_rrm": 0.5, "window": "hann" },
//!   "baseline":   { "feature_range_hint": 6.0, "averages": 1 },
//!   "monitor":    { "near_m": 0.1, "far_m": 2.6, "excess_threshold": 0.01, "guard_bins": 2 },
//!   "safety":     { "stop_range_m": 1.0, "slow_range_m": 3.0, "slow_speed_cap": 0.25, "hysteresis_m": 0.2 }
//! }
//! ```
//!
//! Only `scene` is required.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Window;
use crate::rrm::ClassBands;
use crate::safety::TierConfig;
use crate::scene::Scene;
use crate::synth::ChirpConfig;
use crate::throughwall::MonitorZone;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierConfig {
    pub bands: ClassBands,
    /// Peaks weaker than this multiple of the reference feature are ignored.
    pub min_rrm: f64,
    pub window: Window,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            bands: ClassBands::default(),
            min_rrm: 0.5,
            window: Window::Hann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub feature_range_hint: f64,
    /// Number of empty-reference scans averaged into the baseline.
    pub averages: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            feature_range_hint: 6.0,
            averages: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    #[serde(default)]
    pub chirp: ChirpConfig,
    pub scene: Scene,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    #[serde(default)]
    pub baseline: BaselineConfig,
    #[serde(default)]
    pub monitor: MonitorZone,
    #[serde(default)]
    pub safety: TierConfig,
}

/// Keys accepted by [`SceneFile::apply_override`].
pub const OVERRIDE_KEYS: &[&str] = &[
    "seed",
    "noise_seed",
    "noise_amplitude",
    "range_bias_m",
    "window",
    "bands.infrastructure_max",
    "bands.human_max",
    "min_rrm",
    "feature_range_hint",
    "averages",
    "excess_threshold",
    "guard_bins",
    "stop_range_m",
    "slow_range_m",
    "slow_speed_cap",
    "hysteresis_m",
    "treat_unknown_as_human",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

impl SceneFile {
    pub fn new(scene: Scene) -> Self {
        Self {
            chirp: ChirpConfig::default(),
            scene,
            classifier: ClassifierConfig::default(),
            baseline: BaselineConfig::default(),
            monitor: MonitorZone::default(),
            safety: TierConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks every section; scene violations come back as
    /// [`Error::InvalidScene`].
    pub fn validate(&self) -> Result<()> {
        self.chirp.validate()?;
        self.scene.validate().into_result()?;
        self.classifier.bands.validate()?;
        if !(self.classifier.min_rrm > 0.0 && self.classifier.min_rrm.is_finite()) {
            return Err(Error::config("classifier.min_rrm", "must be > 0"));
        }
        if self.baseline.averages == 0 {
            return Err(Error::config("baseline.averages", "must be ≥ 1"));
        }
        self.monitor.validate()?;
        self.safety.validate()
    }

    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "seed" => self.scene.rng_seed = parse(key, value)?,
            "noise_seed" => self.scene.noise_seed = Some(parse(key, value)?),
            "noise_amplitude" => self.scene.noise_amplitude = parse(key, value)?,
            "range_bias_m" => self.chirp.range_bias_m = parse(key, value)?,
            "window" => self.classifier.window = value.parse()?,
            "bands.infrastructure_max" => self.classifier.bands.infrastructure_max = parse(key, value)?,
            "bands.human_max" => self.classifier.bands.human_max = parse(key, value)?,
            "min_rrm" => self.classifier.min_rrm = parse(key, value)?,
            "feature_range_hint" => self.baseline.feature_range_hint = parse(key, value)?,
            "averages" => self.baseline.averages = parse(key, value)?,
            "excess_threshold" => self.monitor.excess_threshold = parse(key, value)?,
            "guard_bins" => self.monitor.guard_bins = parse(key, value)?,
            "stop_range_m" => self.safety.stop_range_m = parse(key, value)?,
            "slow_range_m" => self.safety.slow_range_m = parse(key, value)?,
            "slow_speed_cap" => self.safety.slow_speed_cap = parse(key, value)?,
            "hysteresis_m" => self.safety.hysteresis_m = parse(key, value)?,
            "treat_unknown_as_human" => self.safety.treat_unknown_as_human = parse(key, value)?,
            other => {
                return Err(Error::config(
                    other,
                    format!("not an overridable key (allowed: {})", OVERRIDE_KEYS.join(", ")),
                ))
            }
        }
        Ok(())
    }

    /// Applies `key=value` strings in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for kv in overrides {
            let kv = kv.as_ref();
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::config(kv, "override must look like key=value"))?;
            self.apply_override(k.trim(), v)?;
        }
        Ok(())
    }
}
