//! Relative reflection magnitude (RRM) and three-way target classification.
//!
//! A target's RRM is its peak RSA divided by the RSA of a designated feature
//! of an empty-reference scan (the back wall of the room). Infrastructure
//! sits near 1, people a little above, sheet metal an order of magnitude
//! above.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{detect_peaks, sig9, Peak, RangeProfile};

/// Half-width of the search window around the feature range hint, in bins.
pub const FEATURE_WINDOW_BINS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetClass {
    Infrastructure,
    Human,
    Metallic,
}

impl TargetClass {
    pub const ALL: [TargetClass; 3] = [TargetClass::Infrastructure, TargetClass::Human, TargetClass::Metallic];

    pub fn as_str(self) -> &'static str {
        match self {
            TargetClass::Infrastructure => "infrastructure",
            TargetClass::Human => "human",
            TargetClass::Metallic => "metallic",
        }
    }
}

impl fmt::Display for TargetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "infrastructure" | "reference" | "wall" => Ok(TargetClass::Infrastructure),
            "human" => Ok(TargetClass::Human),
            "metallic" | "metal" | "aluminium" | "aluminum" | "copper" => Ok(TargetClass::Metallic),
            other => Err(Error::config("label", format!("unknown class `{other}`"))),
        }
    }
}

/// Published reflection magnitudes for a human and a 700 × 500 mm aluminium
/// sheet at 1–4 m, normalised to the empty-room back wall at 6 m.
pub const REFERENCE_RRM: [(&str, f64, TargetClass); 9] = [
    ("no_target_reference", 1.0, TargetClass::Infrastructure),
    ("human_100cm", 1.55, TargetClass::Human),
    ("human_200cm", 1.88, TargetClass::Human),
    ("human_300cm", 1.51, TargetClass::Human),
    ("human_400cm", 1.32, TargetClass::Human),
    ("aluminium_100cm", 14.93, TargetClass::Metallic),
    ("aluminium_200cm", 10.79, TargetClass::Metallic),
    ("aluminium_300cm", 7.51, TargetClass::Metallic),
    ("aluminium_400cm", 13.52, TargetClass::Metallic),
];

pub fn reference_samples() -> Vec<(f64, TargetClass)> {
    REFERENCE_RRM.iter().map(|&(_, rrm, class)| (rrm, class)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    pub profile: RangeProfile,
    pub reference_feature: Peak,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassBands {
    pub infrastructure_max: f64,
    pub human_max: f64,
}

impl Default for ClassBands {
    /// Geometric-mean cutpoints of the published table: √(1·1.32) and
    /// √(1.88·7.51).
    fn default() -> Self {
        Self {
            infrastructure_max: (1.0f64 * 1.32).sqrt(),
            human_max: (1.88f64 * 7.51).sqrt(),
        }
    }
}

impl ClassBands {
    pub fn new(infrastructure_max: f64, human_max: f64) -> Result<Self> {
        let bands = Self {
            infrastructure_max,
            human_max,
        };
        bands.validate()?;
        Ok(bands)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.infrastructure_max >= 1.0 && self.infrastructure_max < self.human_max && self.human_max.is_finite()) {
            return Err(Error::config(
                "classifier.bands",
                format!(
                    "need 1 ≤ infrastructure_max < human_max, got {} and {}",
                    self.infrastructure_max, self.human_max
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RrmReading {
    pub target_peak: Peak,
    pub rrm: f64,
    pub baseline_label: String,
}

pub fn capture_baseline(profiles: &[RangeProfile], feature_range_hint: f64) -> Result<Baseline> {
    capture_baseline_labeled(profiles, feature_range_hint, "empty_reference")
}

pub fn capture_baseline_labeled(
    profiles: &[RangeProfile],
    feature_range_hint: f64,
    label: &str,
) -> Result<Baseline> {
    let profile = RangeProfile::mean(profiles)?;
    let not_found = || Error::ReferenceFeatureNotFound {
        hint_m: feature_range_hint,
    };
    let centre = profile.nearest_bin(feature_range_hint).ok_or_else(not_found)?;
    let spacing = profile.bin_spacing();
    if (profile.bins[centre].range_m - feature_range_hint).abs() > (FEATURE_WINDOW_BINS as f64 + 0.5) * spacing {
        return Err(not_found());
    }
    let lo = centre.saturating_sub(FEATURE_WINDOW_BINS);
    let hi = centre + FEATURE_WINDOW_BINS;
    let reference_feature = detect_peaks(&profile, 0.0, 0.0)
        .into_iter()
        .filter(|p| (lo..=hi).contains(&p.bin))
        .reduce(|best, p| if p.rsa > best.rsa { p } else { best })
        .ok_or_else(not_found)?;
    Ok(Baseline {
        profile,
        reference_feature,
        label: label.to_owned(),
    })
}

pub fn rrm(target_peak: &Peak, baseline: &Baseline) -> Result<RrmReading> {
    let reference = baseline.reference_feature.rsa;
    for amplitude in [target_peak.rsa, reference] {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::NonPositiveAmplitude(amplitude));
        }
    }
    Ok(RrmReading {
        target_peak: *target_peak,
        rrm: target_peak.rsa / reference,
        baseline_label: baseline.label.clone(),
    })
}

pub fn classify(reading: &RrmReading, bands: &ClassBands) -> TargetClass {
    classify_value(reading.rrm, bands)
}

pub fn classify_value(rrm: f64, bands: &ClassBands) -> TargetClass {
    if rrm <= bands.infrastructure_max {
        TargetClass::Infrastructure
    } else if rrm <= bands.human_max {
        TargetClass::Human
    } else {
        TargetClass::Metallic
    }
}

/// Cutpoints between adjacent classes at the geometric mean of the highest
/// lower-class and lowest upper-class RRM.
pub fn calibrate_bands(labeled: &[(f64, TargetClass)]) -> Result<ClassBands> {
    let range_of = |class: TargetClass| {
        labeled
            .iter()
            .filter(|(_, c)| *c == class)
            .map(|&(r, _)| r)
            .fold(None, |acc: Option<(f64, f64)>, r| match acc {
                None => Some((r, r)),
                Some((lo, hi)) => Some((lo.min(r), hi.max(r))),
            })
    };
    if let Some(&(bad, _)) = labeled.iter().find(|(r, _)| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::NonPositiveAmplitude(bad));
    }
    let present: Vec<_> = TargetClass::ALL
        .iter()
        .filter_map(|&c| range_of(c).map(|r| (c, r)))
        .collect();
    if present.len() < 2 {
        return Err(Error::TooFewClasses(present.len()));
    }
    if present.len() < 3 {
        let missing: Vec<_> = TargetClass::ALL
            .iter()
            .filter(|c| !present.iter().any(|(p, _)| p == *c))
            .map(|c| c.as_str())
            .collect();
        return Err(Error::NotSeparable(format!("no samples for class {}", missing.join(", "))));
    }
    let (_, (_, infra_hi)) = present[0];
    let (_, (human_lo, human_hi)) = present[1];
    let (_, (metal_lo, _)) = present[2];
    if infra_hi >= human_lo {
        return Err(Error::NotSeparable(format!(
            "infrastructure max {infra_hi} ≥ human min {human_lo}"
        )));
    }
    if human_hi >= metal_lo {
        return Err(Error::NotSeparable(format!("human max {human_hi} ≥ metallic min {metal_lo}")));
    }
    ClassBands::new((infra_hi * human_lo).sqrt(), (human_hi * metal_lo).sqrt())
        .map_err(|e| Error::NotSeparable(e.to_string()))
}

/// Reads `rrm,label` rows.
pub fn read_labeled_csv<R: Read>(reader: R) -> Result<Vec<(f64, TargetClass)>> {
    #[derive(Deserialize)]
    struct Row {
        rrm: f64,
        label: String,
    }
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: Row = row?;
        out.push((row.rrm, row.label.parse()?));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedReading {
    pub reading: RrmReading,
    pub class: TargetClass,
}

/// `peak_range_m,rsa,rrm,class`.
pub fn write_classification_csv<W: Write>(rows: &[ClassifiedReading], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["peak_range_m", "rsa", "rrm", "class"])?;
    for row in rows {
        let p = &row.reading.target_peak;
        w.write_record([sig9(p.range_m), sig9(p.rsa), sig9(row.reading.rrm), row.class.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
