//! Through-wall occupancy by differencing live scans against an
//! empty-reference profile of the same corridor.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{find_peaks, sig9, Peak, RangeProfile};

/// Consecutive occupied scans that must close in (or open up) for a trend.
pub const APPROACH_WINDOW: usize = 3;

/// Corridor between the near wall (`near_m`) and far wall (`far_m`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorZone {
    pub near_m: f64,
    pub far_m: f64,
    pub excess_threshold: f64,
    #[serde(default = "default_guard_bins")]
    pub guard_bins: usize,
}

fn default_guard_bins() -> usize {
    2
}

impl Default for MonitorZone {
    fn default() -> Self {
        Self {
            near_m: 0.10,
            far_m: 2.60,
            excess_threshold: 0.01,
            guard_bins: default_guard_bins(),
        }
    }
}

impl MonitorZone {
    pub fn new(near_m: f64, far_m: f64) -> Result<Self> {
        let zone = Self {
            near_m,
            far_m,
            ..Self::default()
        };
        zone.validate()?;
        Ok(zone)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.near_m > 0.0 && self.near_m < self.far_m && self.far_m.is_finite()) {
            return Err(Error::config(
                "monitor.zone",
                format!("need 0 < near < far, got {},{}", self.near_m, self.far_m),
            ));
        }
        if !(self.excess_threshold > 0.0 && self.excess_threshold.is_finite()) {
            return Err(Error::config("monitor.excess_threshold", "must be > 0"));
        }
        Ok(())
    }

    /// Open interval `(near + guard, far − guard)` for a given bin spacing.
    pub fn interval(&self, bin_spacing: f64) -> (f64, f64) {
        let guard = self.guard_bins as f64 * bin_spacing;
        (self.near_m + guard, self.far_m - guard)
    }

    pub fn contains(&self, range_m: f64, bin_spacing: f64) -> bool {
        let (lo, hi) = self.interval(bin_spacing);
        range_m > lo && range_m < hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyReport {
    pub occupied: bool,
    /// Excess peaks inside the zone; `rsa` holds the excess amplitude.
    pub detections: Vec<Peak>,
    pub scan_index: usize,
    pub bin_spacing_m: f64,
}

impl OccupancyReport {
    /// Highest-excess detection; ties go to the nearer one.
    pub fn strongest(&self) -> Option<&Peak> {
        self.detections
            .iter()
            .reduce(|best, p| if p.rsa > best.rsa { p } else { best })
    }
}

pub fn detect_occupancy(
    baseline: &RangeProfile,
    scan: &RangeProfile,
    zone: &MonitorZone,
    scan_index: usize,
) -> Result<OccupancyReport> {
    if baseline.chirp != scan.chirp || baseline.len() != scan.len() {
        return Err(Error::ChirpMismatch);
    }
    let spacing = scan.bin_spacing();
    let excess: Vec<f64> = scan
        .bins
        .iter()
        .zip(&baseline.bins)
        .map(|(s, b)| s.rsa - b.rsa)
        .collect();
    let t = zone.excess_threshold;
    let detections: Vec<Peak> = find_peaks(&excess)
        .into_iter()
        .filter(|&(i, prominence)| {
            zone.contains(scan.bins[i].range_m, spacing) && excess[i] >= t && prominence >= t
        })
        .map(|(i, prominence)| Peak {
            bin: i,
            range_m: scan.bins[i].range_m,
            rsa: excess[i],
            prominence,
        })
        .collect();
    Ok(OccupancyReport {
        occupied: !detections.is_empty(),
        detections,
        scan_index,
        bin_spacing_m: spacing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproachStatus {
    Empty,
    Static,
    Approaching,
    Receding,
}

impl fmt::Display for ApproachStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ApproachStatus::Empty => "empty",
            ApproachStatus::Static => "static",
            ApproachStatus::Approaching => "approaching",
            ApproachStatus::Receding => "receding",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproachTrack {
    pub ranges_m: Vec<f64>,
    pub status: ApproachStatus,
}

pub fn track_approach(reports: &[OccupancyReport]) -> ApproachTrack {
    let mut spacing = 0.0f64;
    let ranges_m: Vec<f64> = reports
        .iter()
        .filter_map(|r| {
            spacing = spacing.max(r.bin_spacing_m);
            r.strongest().map(|p| p.range_m)
        })
        .collect();
    let status = trend(&ranges_m, spacing);
    ApproachTrack { ranges_m, status }
}

/// Each step of the tail must move by at least one whole bin.
fn trend(ranges: &[f64], spacing: f64) -> ApproachStatus {
    if ranges.is_empty() {
        return ApproachStatus::Empty;
    }
    if ranges.len() < APPROACH_WINDOW {
        return ApproachStatus::Static;
    }
    let tail = &ranges[ranges.len() - APPROACH_WINDOW..];
    let min_step = spacing * (1.0 - 1e-9);
    if tail.windows(2).all(|w| w[0] - w[1] >= min_step) {
        ApproachStatus::Approaching
    } else if tail.windows(2).all(|w| w[1] - w[0] >= min_step) {
        ApproachStatus::Receding
    } else {
        ApproachStatus::Static
    }
}

/// Streaming front end: one baseline, scans ingested in order.
#[derive(Debug, Clone)]
pub struct ThroughWallMonitor {
    baseline: RangeProfile,
    zone: MonitorZone,
    reports: Vec<OccupancyReport>,
}

impl ThroughWallMonitor {
    pub fn new(baseline: RangeProfile, zone: MonitorZone) -> Result<Self> {
        zone.validate()?;
        Ok(Self {
            baseline,
            zone,
            reports: Vec::new(),
        })
    }

    pub fn ingest(&mut self, scan: &RangeProfile) -> Result<(&OccupancyReport, ApproachStatus)> {
        let report = detect_occupancy(&self.baseline, scan, &self.zone, self.reports.len())?;
        self.reports.push(report);
        let status = track_approach(&self.reports).status;
        Ok((self.reports.last().expect("just pushed"), status))
    }

    pub fn reports(&self) -> &[OccupancyReport] {
        &self.reports
    }

    pub fn track(&self) -> ApproachTrack {
        track_approach(&self.reports)
    }
}

/// `scan_index,occupied,range_m,excess_rsa,status`, status evaluated over
/// the reports up to and including each row.
pub fn write_monitor_csv<W: Write>(reports: &[OccupancyReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["scan_index", "occupied", "range_m", "excess_rsa", "status"])?;
    for (i, r) in reports.iter().enumerate() {
        let status = track_approach(&reports[..=i]).status;
        let (range, excess) = match r.strongest() {
            Some(p) => (sig9(p.range_m), sig9(p.rsa)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            r.scan_index.to_string(),
            r.occupied.to_string(),
            range,
            excess,
            status.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::profile::{range_profile, Window};
    use crate::scene::{Material, Scatterer, ScattererKind, Scene, Wall};
    use crate::synth::{synthesize_beat, ChirpConfig};

    fn corridor() -> Scene {
        Scene::new(4.0)
            .with_seed(9)
            .with_wall(Wall::new("wall_1", 0.10, Material::plasterboard()))
            .with_wall(Wall::new("wall_2", 2.60, Material::plasterboard()))
    }

    fn with_sheet(range_m: f64) -> Scene {
        corridor().with_scatterer(
            Scatterer::new("sheet", range_m, Material::copper(), ScattererKind::MetalSheet).with_extent(0.3, 0.3),
        )
    }

    fn profile(scene: &Scene) -> RangeProfile {
        range_profile(&synthesize_beat(scene, &ChirpConfig::default()).unwrap(), Window::Hann)
    }

    fn report_at(range: Option<f64>, index: usize) -> OccupancyReport {
        let detections = range
            .map(|r| {
                vec![Peak {
                    bin: 0,
                    range_m: r,
                    rsa: 1.0,
                    prominence: 1.0,
                }]
            })
            .unwrap_or_default();
        OccupancyReport {
            occupied: range.is_some(),
            detections,
            scan_index: index,
            bin_spacing_m: 0.075,
        }
    }

    #[test]
    fn identical_scan_is_unoccupied() {
        let base = profile(&corridor());
        let r = detect_occupancy(&base, &base, &MonitorZone::default(), 0).unwrap();
        assert!(!r.occupied);
        assert!(r.detections.is_empty());
    }

    #[test]
    fn sheet_in_corridor_is_detected() {
        let base = profile(&corridor());
        let scan = profile(&with_sheet(1.6));
        let r = detect_occupancy(&base, &scan, &MonitorZone::default(), 3).unwrap();
        assert!(r.occupied);
        assert_eq!(r.scan_index, 3);
        let p = r.strongest().unwrap();
        assert!((p.range_m - 1.6).abs() <= 1.5 * r.bin_spacing_m, "{}", p.range_m);
    }

    #[test]
    fn sheet_beyond_far_wall_is_outside_zone() {
        let base = profile(&corridor());
        let scan = profile(&with_sheet(3.2));
        let r = detect_occupancy(&base, &scan, &MonitorZone::default(), 0).unwrap();
        assert!(!r.occupied, "{:?}", r.detections);
    }

    #[test]
    fn mismatched_chirp_is_an_error() {
        let base = profile(&corridor());
        let other = ChirpConfig {
            bandwidth_hz: 1.0e9,
            ..ChirpConfig::default()
        };
        let scan = range_profile(&synthesize_beat(&corridor(), &other).unwrap(), Window::Hann);
        assert!(matches!(
            detect_occupancy(&base, &scan, &MonitorZone::default(), 0),
            Err(Error::ChirpMismatch)
        ));
    }

    #[test]
    fn approach_status_rules() {
        let approaching: Vec<_> = [2.2, 1.6, 1.0, 0.4]
            .iter()
            .enumerate()
            .map(|(i, &r)| report_at(Some(r), i))
            .collect();
        assert_eq!(track_approach(&approaching).status, ApproachStatus::Approaching);

        let receding: Vec<_> = approaching.iter().rev().cloned().collect();
        assert_eq!(track_approach(&receding).status, ApproachStatus::Receding);

        let empty: Vec<_> = (0..4).map(|i| report_at(None, i)).collect();
        assert_eq!(track_approach(&empty).status, ApproachStatus::Empty);

        let still: Vec<_> = [1.0, 1.05, 1.0, 1.02]
            .iter()
            .enumerate()
            .map(|(i, &r)| report_at(Some(r), i))
            .collect();
        assert_eq!(track_approach(&still).status, ApproachStatus::Static);

        // one-bin steps count, a bin of jitter does not
        let one_bin: Vec<_> = [1.3, 1.225, 1.15]
            .iter()
            .enumerate()
            .map(|(i, &r)| report_at(Some(r), i))
            .collect();
        assert_eq!(track_approach(&one_bin).status, ApproachStatus::Approaching);
        let jitter: Vec<_> = [1.3, 1.225, 1.3]
            .iter()
            .enumerate()
            .map(|(i, &r)| report_at(Some(r), i))
            .collect();
        assert_eq!(track_approach(&jitter).status, ApproachStatus::Static);

        let short = vec![report_at(Some(2.0), 0), report_at(Some(1.0), 1)];
        assert_eq!(track_approach(&short).status, ApproachStatus::Static);

        // gaps of empty scans are skipped
        let gappy = vec![
            report_at(Some(2.0), 0),
            report_at(None, 1),
            report_at(Some(1.5), 2),
            report_at(None, 3),
            report_at(Some(1.0), 4),
        ];
        let track = track_approach(&gappy);
        assert_eq!(track.ranges_m, vec![2.0, 1.5, 1.0]);
        assert_eq!(track.status, ApproachStatus::Approaching);
    }

    #[test]
    fn steps_within_one_bin_are_not_a_trend() {
        let creeping: Vec<_> = [1.2, 1.13, 1.06]
            .iter()
            .enumerate()
            .map(|(i, &r)| report_at(Some(r), i))
            .collect();
        assert_eq!(track_approach(&creeping).status, ApproachStatus::Static);
    }

    #[test]
    fn monitor_streams_reports() {
        let mut monitor = ThroughWallMonitor::new(profile(&corridor()), MonitorZone::default()).unwrap();
        let mut last = ApproachStatus::Empty;
        for r in [2.2, 1.6, 1.0, 0.4] {
            let (report, status) = monitor.ingest(&profile(&with_sheet(r))).unwrap();
            assert!(report.occupied);
            last = status;
        }
        assert_eq!(last, ApproachStatus::Approaching);
        assert_eq!(monitor.reports().len(), 4);
    }

    #[test]
    fn monitor_csv_layout() {
        let reports = vec![report_at(None, 0), report_at(Some(1.0), 1)];
        let mut out = Vec::new();
        write_monitor_csv(&reports, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "scan_index,occupied,range_m,excess_rsa,status\n0,false,,,empty\n1,true,1.00000000e0,1.00000000e0,static\n"
        );
    }

    #[test]
    fn zone_validation() {
        assert!(MonitorZone::new(0.1, 2.6).is_ok());
        assert!(MonitorZone::new(2.6, 0.1).is_err());
        assert!(MonitorZone::new(0.0, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn no_false_positive_on_identical_scene(seed in any::<u64>(), noise in 0.0f64..0.01, sheet in prop::option::of(0.2f64..3.5)) {
            let mut scene = corridor().with_seed(seed).with_noise(noise);
            if let Some(r) = sheet {
                scene = scene.with_scatterer(Scatterer::new("sheet", r, Material::copper(), ScattererKind::MetalSheet));
            }
            let p = profile(&scene);
            prop_assert!(!detect_occupancy(&p, &p, &MonitorZone::default(), 0).unwrap().occupied);
        }

        #[test]
        fn detections_stay_inside_zone_and_threshold_is_monotone(
            seed in any::<u64>(),
            sheet in 0.15f64..3.5,
            near in 0.05f64..1.0,
            width in 0.3f64..3.0,
            t1 in 1e-4f64..0.5,
            t2 in 1e-4f64..0.5,
        ) {
            let base = profile(&corridor().with_seed(seed));
            let scan = profile(&with_sheet(sheet).with_seed(seed));
            let (lo_t, hi_t) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let zone = |t| MonitorZone { near_m: near, far_m: near + width, excess_threshold: t, guard_bins: 2 };
            let low = detect_occupancy(&base, &scan, &zone(lo_t), 0).unwrap();
            let high = detect_occupancy(&base, &scan, &zone(hi_t), 0).unwrap();
            let (lo, hi) = zone(lo_t).interval(low.bin_spacing_m);
            for p in low.detections.iter().chain(&high.detections) {
                prop_assert!(p.range_m > lo && p.range_m < hi);
            }
            prop_assert!(!high.occupied || low.occupied);
        }
    }
}
