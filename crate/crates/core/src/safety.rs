//! Tiered speed limiting on human proximity and the door-entry flag driven
//! by through-wall occupancy.
//!
//! Escalation is immediate. Leaving a tier requires the nearest human to be
//! further than that tier's boundary plus `hysteresis_m`, which keeps the
//! tier from flapping when someone stands on a zone edge.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Peak;
use crate::rrm::TargetClass;
use crate::throughwall::OccupancyReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Normal,
    Slow,
    Stop,
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tier::Normal => "normal",
            Tier::Slow => "slow",
            Tier::Stop => "stop",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierConfig {
    pub stop_range_m: f64,
    pub slow_range_m: f64,
    pub slow_speed_cap: f64,
    pub hysteresis_m: f64,
    /// Tier on unclassified peaks as if they were people.
    #[serde(default)]
    pub treat_unknown_as_human: bool,
}

impl Default for TierConfig {
    fn default() -> Self {
        Self {
            stop_range_m: 1.0,
            slow_range_m: 3.0,
            slow_speed_cap: 0.25,
            hysteresis_m: 0.2,
            treat_unknown_as_human: false,
        }
    }
}

impl TierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.stop_range_m > 0.0 && self.stop_range_m < self.slow_range_m && self.slow_range_m.is_finite()) {
            return Err(Error::config("safety.tiers", "need 0 < stop_range_m < slow_range_m"));
        }
        if !(self.slow_speed_cap > 0.0 && self.slow_speed_cap < 1.0) {
            return Err(Error::config("safety.slow_speed_cap", "must lie in (0, 1)"));
        }
        if !(self.hysteresis_m >= 0.0 && self.hysteresis_m.is_finite()) {
            return Err(Error::config("safety.hysteresis_m", "must be ≥ 0"));
        }
        Ok(())
    }

    pub fn speed_cap(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Normal => 1.0,
            Tier::Slow => self.slow_speed_cap,
            Tier::Stop => 0.0,
        }
    }

    /// Tier implied by a human at `d` with no history.
    fn raw_tier(&self, d: f64) -> Tier {
        if d < self.stop_range_m {
            Tier::Stop
        } else if d < self.slow_range_m {
            Tier::Slow
        } else {
            Tier::Normal
        }
    }

    /// Most severe tier still held at `d` when de-escalating.
    fn held_tier(&self, d: f64) -> Tier {
        if d <= self.stop_range_m + self.hysteresis_m {
            Tier::Stop
        } else if d <= self.slow_range_m + self.hysteresis_m {
            Tier::Slow
        } else {
            Tier::Normal
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyState {
    pub tier: Tier,
    pub speed_cap: f64,
    pub door_entry_allowed: bool,
    pub cause: String,
}

impl Default for SafetyState {
    fn default() -> Self {
        Self {
            tier: Tier::Normal,
            speed_cap: 1.0,
            door_entry_allowed: true,
            cause: "clear".to_owned(),
        }
    }
}

impl SafetyState {
    /// `t=<scan_index> tier=<tier> cap=<speed_cap> door=<bool> cause=<text>`
    pub fn log_line(&self, scan_index: usize) -> String {
        format!(
            "t={scan_index} tier={} cap={} door={} cause={}",
            self.tier, self.speed_cap, self.door_entry_allowed, self.cause
        )
    }

    /// Tier, speed cap and door flag agree with each other.
    pub fn is_consistent(&self, cfg: &TierConfig) -> bool {
        self.speed_cap == cfg.speed_cap(self.tier)
    }
}

/// A detected peak with its class, `None` when it could not be classified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifiedPeak {
    pub peak: Peak,
    pub class: Option<TargetClass>,
}

impl ClassifiedPeak {
    pub fn new(peak: Peak, class: Option<TargetClass>) -> Self {
        Self { peak, class }
    }
}

const DOOR_CAUSE: &str = "door blocked at";

pub fn update_tier(state: &SafetyState, peaks: &[ClassifiedPeak], cfg: &TierConfig) -> SafetyState {
    let counts_as_human = |c: &ClassifiedPeak| match c.class {
        Some(TargetClass::Human) => true,
        None => cfg.treat_unknown_as_human,
        Some(_) => false,
    };
    let nearest = peaks
        .iter()
        .filter(|c| counts_as_human(c))
        .map(|c| c.peak.range_m)
        .fold(f64::INFINITY, f64::min);

    let raw = cfg.raw_tier(nearest);
    let tier = raw.max(state.tier.min(cfg.held_tier(nearest)));

    let mut cause = if nearest.is_finite() {
        let label = if tier > raw { " (hysteresis)" } else { "" };
        format!("human at {nearest:.2} m{label}")
    } else if tier > Tier::Normal {
        "clear (hysteresis)".to_owned()
    } else {
        "clear".to_owned()
    };
    if !cfg.treat_unknown_as_human {
        if let Some(u) = peaks.iter().find(|c| c.class.is_none()) {
            cause.push_str(&format!("; unclassified peak at {:.2} m", u.peak.range_m));
        }
    }
    if let Some(door) = door_suffix(&state.cause) {
        cause.push_str("; ");
        cause.push_str(door);
    }

    SafetyState {
        tier,
        speed_cap: cfg.speed_cap(tier),
        door_entry_allowed: state.door_entry_allowed,
        cause,
    }
}

pub fn update_door_policy(state: &SafetyState, occupancy: &OccupancyReport) -> SafetyState {
    let base = strip_door(&state.cause);
    let cause = match occupancy.strongest() {
        Some(p) if occupancy.occupied => {
            if base.is_empty() {
                format!("{DOOR_CAUSE} {:.2} m", p.range_m)
            } else {
                format!("{base}; {DOOR_CAUSE} {:.2} m", p.range_m)
            }
        }
        _ => base.to_owned(),
    };
    SafetyState {
        tier: state.tier,
        speed_cap: state.speed_cap,
        door_entry_allowed: !occupancy.occupied,
        cause,
    }
}

fn door_suffix(cause: &str) -> Option<&str> {
    cause.find(DOOR_CAUSE).map(|i| &cause[i..])
}

fn strip_door(cause: &str) -> &str {
    match cause.find(DOOR_CAUSE) {
        Some(i) => cause[..i].trim_end_matches("; ").trim_end(),
        None => cause,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn peak_at(range_m: f64) -> Peak {
        Peak {
            bin: 0,
            range_m,
            rsa: 1.0,
            prominence: 1.0,
        }
    }

    fn human(range_m: f64) -> ClassifiedPeak {
        ClassifiedPeak::new(peak_at(range_m), Some(TargetClass::Human))
    }

    fn occupancy(range: Option<f64>) -> OccupancyReport {
        OccupancyReport {
            occupied: range.is_some(),
            detections: range.map(|r| vec![peak_at(r)]).unwrap_or_default(),
            scan_index: 0,
            bin_spacing_m: 0.075,
        }
    }

    #[test]
    fn close_human_stops() {
        let s = update_tier(&SafetyState::default(), &[human(0.8)], &TierConfig::default());
        assert_eq!(s.tier, Tier::Stop);
        assert_eq!(s.speed_cap, 0.0);
        assert!(s.cause.contains("0.80"));
    }

    #[test]
    fn metal_never_escalates() {
        let metal = ClassifiedPeak::new(peak_at(0.5), Some(TargetClass::Metallic));
        let s = update_tier(&SafetyState::default(), &[metal], &TierConfig::default());
        assert_eq!(s.tier, Tier::Normal);
        assert_eq!(s.cause, "clear");
    }

    #[test]
    fn hysteresis_holds_slow_tier() {
        let cfg = TierConfig::default();
        let s1 = update_tier(&SafetyState::default(), &[human(2.0)], &cfg);
        assert_eq!((s1.tier, s1.speed_cap), (Tier::Slow, 0.25));
        let s2 = update_tier(&s1, &[human(3.05)], &cfg);
        assert_eq!(s2.tier, Tier::Slow);
        assert!(s2.cause.contains("hysteresis"));
        let s3 = update_tier(&s2, &[human(3.25)], &cfg);
        assert_eq!(s3.tier, Tier::Normal);
        assert_eq!(s3.speed_cap, 1.0);
    }

    #[test]
    fn stop_releases_through_slow() {
        let cfg = TierConfig::default();
        let stop = update_tier(&SafetyState::default(), &[human(0.5)], &cfg);
        assert_eq!(update_tier(&stop, &[human(1.1)], &cfg).tier, Tier::Stop);
        assert_eq!(update_tier(&stop, &[human(1.3)], &cfg).tier, Tier::Slow);
        assert_eq!(update_tier(&stop, &[], &cfg).tier, Tier::Normal);
    }

    #[test]
    fn unknown_peaks_are_surfaced_or_tiered() {
        let unknown = ClassifiedPeak::new(peak_at(0.6), None);
        let mut cfg = TierConfig::default();
        let s = update_tier(&SafetyState::default(), &[unknown], &cfg);
        assert_eq!(s.tier, Tier::Normal);
        assert!(s.cause.contains("unclassified peak at 0.60 m"));
        cfg.treat_unknown_as_human = true;
        assert_eq!(update_tier(&SafetyState::default(), &[unknown], &cfg).tier, Tier::Stop);
    }

    #[test]
    fn door_flag_follows_occupancy_without_latching() {
        let s0 = SafetyState::default();
        assert!(update_door_policy(&s0, &occupancy(None)).door_entry_allowed);
        let blocked = update_door_policy(&s0, &occupancy(Some(1.0)));
        assert!(!blocked.door_entry_allowed);
        assert!(blocked.cause.contains("door blocked at 1.00 m"));
        assert_eq!(blocked.tier, s0.tier);
        let cleared = update_door_policy(&blocked, &occupancy(None));
        assert!(cleared.door_entry_allowed);
        assert!(!cleared.cause.contains("door"));
    }

    #[test]
    fn door_cause_survives_tier_updates() {
        let cfg = TierConfig::default();
        let blocked = update_door_policy(&SafetyState::default(), &occupancy(Some(1.6)));
        let s = update_tier(&blocked, &[human(2.0)], &cfg);
        assert_eq!(s.cause, "human at 2.00 m; door blocked at 1.60 m");
        assert!(!s.door_entry_allowed);
        let moved = update_door_policy(&s, &occupancy(Some(1.0)));
        assert_eq!(moved.cause, "human at 2.00 m; door blocked at 1.00 m");
    }

    #[test]
    fn log_line_format() {
        let s = update_tier(&SafetyState::default(), &[human(2.0)], &TierConfig::default());
        assert_eq!(s.log_line(4), "t=4 tier=slow cap=0.25 door=true cause=human at 2.00 m");
    }

    #[test]
    fn config_validation() {
        assert!(TierConfig::default().validate().is_ok());
        let bad = TierConfig {
            stop_range_m: 3.0,
            ..TierConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad_cap = TierConfig {
            slow_speed_cap: 1.0,
            ..TierConfig::default()
        };
        assert!(bad_cap.validate().is_err());
    }
}
