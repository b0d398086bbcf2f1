//! C ABI over `foresight-core`.
//!
//! Objects cross the boundary as opaque handles created by `fsr_*_new` /
//! `fsr_*_from_*` functions and released with the matching `fsr_*_free`.
//! Every fallible call returns an [`FsrStatus`]; on failure the message is
//! available from [`fsr_last_error`] on the same thread until the next
//! failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use foresight::profile::{detect_peaks, Peak, RangeProfile};
use foresight::rrm::{self, Baseline, ClassBands, TargetClass};
use foresight::safety::{update_door_policy, update_tier, ClassifiedPeak, SafetyState, Tier, TierConfig};
use foresight::scenario::{self, scene_profile};
use foresight::throughwall::{ApproachStatus, MonitorZone, OccupancyReport, ThroughWallMonitor};
use foresight::{Error, SceneFile};
use libc::size_t;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidScene = 3,
    NotFound = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

pub const FSR_CLASS_UNKNOWN: i32 = -1;
pub const FSR_CLASS_INFRASTRUCTURE: i32 = 0;
pub const FSR_CLASS_HUMAN: i32 = 1;
pub const FSR_CLASS_METALLIC: i32 = 2;

pub const FSR_TIER_NORMAL: i32 = 0;
pub const FSR_TIER_SLOW: i32 = 1;
pub const FSR_TIER_STOP: i32 = 2;

pub const FSR_APPROACH_EMPTY: i32 = 0;
pub const FSR_APPROACH_STATIC: i32 = 1;
pub const FSR_APPROACH_APPROACHING: i32 = 2;
pub const FSR_APPROACH_RECEDING: i32 = 3;

/// Parsed scene file (scene, chirp and analysis settings).
pub struct FsrScene(SceneFile);
pub struct FsrProfile(RangeProfile);
pub struct FsrBaseline(Baseline);
pub struct FsrMonitor(ThroughWallMonitor);
pub struct FsrSafety {
    state: SafetyState,
    config: TierConfig,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsrPeak {
    pub bin: size_t,
    pub range_m: f64,
    pub rsa: f64,
    pub prominence: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsrBands {
    pub infrastructure_max: f64,
    pub human_max: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsrZone {
    pub near_m: f64,
    pub far_m: f64,
    pub excess_threshold: f64,
    pub guard_bins: size_t,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsrTierConfig {
    pub stop_range_m: f64,
    pub slow_range_m: f64,
    pub slow_speed_cap: f64,
    pub hysteresis_m: f64,
    pub treat_unknown_as_human: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsrSafetyView {
    /// One of the `FSR_TIER_*` constants.
    pub tier: i32,
    pub speed_cap: f64,
    pub door_entry_allowed: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsrOccupancy {
    pub occupied: bool,
    pub scan_index: size_t,
    /// Strongest detection; NaN when unoccupied.
    pub range_m: f64,
    pub excess_rsa: f64,
    /// One of the `FSR_APPROACH_*` constants, over all scans so far.
    pub approach: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> FsrStatus {
    match err {
        _ if err.is_io() => FsrStatus::Io,
        Error::InvalidScene(_) | Error::UnambiguousRange { .. } | Error::InvalidChirp(_) => FsrStatus::InvalidScene,
        Error::ReferenceFeatureNotFound { .. } | Error::TargetNotInScene(_) | Error::UnknownScenario(_) => {
            FsrStatus::NotFound
        }
        Error::Stage { source, .. } => status_of(source),
        _ => FsrStatus::InvalidArgument,
    }
}

fn fail(err: Error) -> FsrStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn null(what: &str) -> FsrStatus {
    set_error(format!("{what} is null"));
    FsrStatus::NullPointer
}

fn guard<F: FnOnce() -> FsrStatus>(f: F) -> FsrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            FsrStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, FsrStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        FsrStatus::InvalidArgument
    })
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

fn peak_out(p: &Peak) -> FsrPeak {
    FsrPeak {
        bin: p.bin,
        range_m: p.range_m,
        rsa: p.rsa,
        prominence: p.prominence,
    }
}

fn peak_in(p: &FsrPeak) -> Peak {
    Peak {
        bin: p.bin,
        range_m: p.range_m,
        rsa: p.rsa,
        prominence: p.prominence,
    }
}

fn class_code(c: TargetClass) -> i32 {
    match c {
        TargetClass::Infrastructure => FSR_CLASS_INFRASTRUCTURE,
        TargetClass::Human => FSR_CLASS_HUMAN,
        TargetClass::Metallic => FSR_CLASS_METALLIC,
    }
}

fn class_from(code: i32) -> Option<Option<TargetClass>> {
    match code {
        FSR_CLASS_UNKNOWN => Some(None),
        FSR_CLASS_INFRASTRUCTURE => Some(Some(TargetClass::Infrastructure)),
        FSR_CLASS_HUMAN => Some(Some(TargetClass::Human)),
        FSR_CLASS_METALLIC => Some(Some(TargetClass::Metallic)),
        _ => None,
    }
}

fn approach_code(s: ApproachStatus) -> i32 {
    match s {
        ApproachStatus::Empty => FSR_APPROACH_EMPTY,
        ApproachStatus::Static => FSR_APPROACH_STATIC,
        ApproachStatus::Approaching => FSR_APPROACH_APPROACHING,
        ApproachStatus::Receding => FSR_APPROACH_RECEDING,
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fsr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fsr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses and validates a scene file from a JSON string.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_scene_from_json(json: *const c_char, out: *mut *mut FsrScene) -> FsrStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let text = match c_str(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let setup = match SceneFile::from_json(text) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        if let Err(e) = setup.validate() {
            return fail(e);
        }
        *out = boxed(FsrScene(setup));
        FsrStatus::Ok
    })
}

/// # Safety
/// `scene` must come from [`fsr_scene_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fsr_scene_free(scene: *mut FsrScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Overrides the scene's rng seed.
///
/// # Safety
/// `scene` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fsr_scene_set_seed(scene: *mut FsrScene, seed: u64) -> FsrStatus {
    match scene.as_mut() {
        Some(s) => {
            s.0.scene.rng_seed = seed;
            FsrStatus::Ok
        }
        None => null("scene"),
    }
}

/// Renders the scene into a range profile cut at its max range.
///
/// # Safety
/// `scene` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_scene_profile(scene: *const FsrScene, out: *mut *mut FsrProfile) -> FsrStatus {
    guard(|| {
        let (Some(s), false) = (scene.as_ref(), out.is_null()) else {
            return null("scene or out");
        };
        match scene_profile(&s.0.scene, &s.0) {
            Ok(p) => {
                *out = boxed(FsrProfile(p));
                FsrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Profile of the scene with every scatterer removed: the empty reference.
///
/// # Safety
/// `scene` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_scene_reference_profile(scene: *const FsrScene, out: *mut *mut FsrProfile) -> FsrStatus {
    guard(|| {
        let (Some(s), false) = (scene.as_ref(), out.is_null()) else {
            return null("scene or out");
        };
        let mut empty = s.0.scene.empty_reference();
        empty.noise_seed = Some(scenario::derive_seed(empty.rng_seed, "baseline", 0));
        match scene_profile(&empty, &s.0) {
            Ok(p) => {
                *out = boxed(FsrProfile(p));
                FsrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `profile` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn fsr_profile_len(profile: *const FsrProfile) -> size_t {
    profile.as_ref().map_or(0, |p| p.0.len())
}

/// # Safety
/// `profile` must be a live handle; `range_m` and `rsa` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_profile_bin(
    profile: *const FsrProfile,
    index: size_t,
    range_m: *mut f64,
    rsa: *mut f64,
) -> FsrStatus {
    let Some(p) = profile.as_ref() else {
        return null("profile");
    };
    if range_m.is_null() || rsa.is_null() {
        return null("range_m or rsa");
    }
    match p.0.bins.get(index) {
        Some(b) => {
            *range_m = b.range_m;
            *rsa = b.rsa;
            FsrStatus::Ok
        }
        None => {
            set_error(format!("bin {index} out of range"));
            FsrStatus::InvalidArgument
        }
    }
}

/// New profile with every bin scaled by `(range / 1 m)²`.
///
/// # Safety
/// `profile` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_profile_range_compensated(
    profile: *const FsrProfile,
    out: *mut *mut FsrProfile,
) -> FsrStatus {
    let (Some(p), false) = (profile.as_ref(), out.is_null()) else {
        return null("profile or out");
    };
    *out = boxed(FsrProfile(p.0.range_compensated()));
    FsrStatus::Ok
}

/// # Safety
/// `profile` must be a live handle and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fsr_profile_free(profile: *mut FsrProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Writes up to `capacity` peaks to `out` and the total count to `count`.
/// Returns `BufferTooSmall` when `capacity < *count`; the first `capacity`
/// peaks are still written.
///
/// # Safety
/// `profile` must be a live handle; `out` must hold `capacity` peaks (may be
/// NULL when `capacity` is 0); `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_detect_peaks(
    profile: *const FsrProfile,
    min_prominence: f64,
    min_rsa: f64,
    out: *mut FsrPeak,
    capacity: size_t,
    count: *mut size_t,
) -> FsrStatus {
    guard(|| {
        let Some(p) = profile.as_ref() else {
            return null("profile");
        };
        if count.is_null() || (out.is_null() && capacity > 0) {
            return null("out or count");
        }
        if !(min_prominence >= 0.0 && min_rsa >= 0.0) {
            set_error("thresholds must be ≥ 0");
            return FsrStatus::InvalidArgument;
        }
        let peaks = detect_peaks(&p.0, min_prominence, min_rsa);
        *count = peaks.len();
        for (i, pk) in peaks.iter().take(capacity).enumerate() {
            *out.add(i) = peak_out(pk);
        }
        if capacity < peaks.len() {
            set_error(format!("{} peaks, capacity {capacity}", peaks.len()));
            return FsrStatus::BufferTooSmall;
        }
        FsrStatus::Ok
    })
}

/// Averages `n` profiles into a baseline whose reference feature is the
/// highest peak within three bins of `feature_range_hint`.
///
/// # Safety
/// `profiles` must point to `n` live profile handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_baseline_capture(
    profiles: *const *const FsrProfile,
    n: size_t,
    feature_range_hint: f64,
    out: *mut *mut FsrBaseline,
) -> FsrStatus {
    guard(|| {
        if profiles.is_null() || out.is_null() {
            return null("profiles or out");
        }
        let mut owned = Vec::with_capacity(n);
        for i in 0..n {
            match (*profiles.add(i)).as_ref() {
                Some(p) => owned.push(p.0.clone()),
                None => return null("profile"),
            }
        }
        match rrm::capture_baseline(&owned, feature_range_hint) {
            Ok(b) => {
                *out = boxed(FsrBaseline(b));
                FsrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `baseline` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_baseline_reference(baseline: *const FsrBaseline, out: *mut FsrPeak) -> FsrStatus {
    let (Some(b), false) = (baseline.as_ref(), out.is_null()) else {
        return null("baseline or out");
    };
    *out = peak_out(&b.0.reference_feature);
    FsrStatus::Ok
}

/// # Safety
/// `baseline` must be a live handle and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fsr_baseline_free(baseline: *mut FsrBaseline) {
    if !baseline.is_null() {
        drop(Box::from_raw(baseline));
    }
}

/// Relative reflection magnitude: target RSA over the reference feature RSA.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fsr_rrm(peak: *const FsrPeak, baseline: *const FsrBaseline, out: *mut f64) -> FsrStatus {
    let (Some(p), Some(b), false) = (peak.as_ref(), baseline.as_ref(), out.is_null()) else {
        return null("peak, baseline or out");
    };
    match rrm::rrm(&peak_in(p), &b.0) {
        Ok(r) => {
            *out = r.rrm;
            FsrStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_default_bands(out: *mut FsrBands) -> FsrStatus {
    let Some(o) = out.as_mut() else {
        return null("out");
    };
    let b = ClassBands::default();
    *o = FsrBands {
        infrastructure_max: b.infrastructure_max,
        human_max: b.human_max,
    };
    FsrStatus::Ok
}

/// Writes one of the `FSR_CLASS_*` constants to `out`.
///
/// # Safety
/// `bands` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fsr_classify(rrm_value: f64, bands: *const FsrBands, out: *mut i32) -> FsrStatus {
    let (Some(b), false) = (bands.as_ref(), out.is_null()) else {
        return null("bands or out");
    };
    let bands = match ClassBands::new(b.infrastructure_max, b.human_max) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    if rrm_value.is_nan() || rrm_value <= 0.0 {
        set_error("rrm must be > 0");
        return FsrStatus::InvalidArgument;
    }
    *out = class_code(rrm::classify_value(rrm_value, &bands));
    FsrStatus::Ok
}

/// Geometric-mean cutpoints from `n` labelled RRM values.
///
/// # Safety
/// `rrm_values` and `classes` must each hold `n` elements; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_calibrate_bands(
    rrm_values: *const f64,
    classes: *const i32,
    n: size_t,
    out: *mut FsrBands,
) -> FsrStatus {
    guard(|| {
        if rrm_values.is_null() || classes.is_null() || out.is_null() {
            return null("rrm_values, classes or out");
        }
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let Some(Some(class)) = class_from(*classes.add(i)) else {
                set_error(format!("class code {} at index {i} is not a known class", *classes.add(i)));
                return FsrStatus::InvalidArgument;
            };
            samples.push((*rrm_values.add(i), class));
        }
        match rrm::calibrate_bands(&samples) {
            Ok(b) => {
                *out = FsrBands {
                    infrastructure_max: b.infrastructure_max,
                    human_max: b.human_max,
                };
                FsrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Streaming through-wall monitor over `baseline` (an empty-corridor
/// profile, copied).
///
/// # Safety
/// `baseline` and `zone` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_monitor_new(
    baseline: *const FsrProfile,
    zone: *const FsrZone,
    out: *mut *mut FsrMonitor,
) -> FsrStatus {
    let (Some(b), Some(z), false) = (baseline.as_ref(), zone.as_ref(), out.is_null()) else {
        return null("baseline, zone or out");
    };
    let zone = MonitorZone {
        near_m: z.near_m,
        far_m: z.far_m,
        excess_threshold: z.excess_threshold,
        guard_bins: z.guard_bins,
    };
    match ThroughWallMonitor::new(b.0.clone(), zone) {
        Ok(m) => {
            *out = boxed(FsrMonitor(m));
            FsrStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `monitor` must be a live handle used by one thread at a time; `scan` a
/// live profile; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_monitor_ingest(
    monitor: *mut FsrMonitor,
    scan: *const FsrProfile,
    out: *mut FsrOccupancy,
) -> FsrStatus {
    guard(|| {
        let (Some(m), Some(s), false) = (monitor.as_mut(), scan.as_ref(), out.is_null()) else {
            return null("monitor, scan or out");
        };
        match m.0.ingest(&s.0) {
            Ok((report, status)) => {
                *out = occupancy_out(report, status);
                FsrStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

fn occupancy_out(report: &OccupancyReport, status: ApproachStatus) -> FsrOccupancy {
    let strongest = report.strongest();
    FsrOccupancy {
        occupied: report.occupied,
        scan_index: report.scan_index,
        range_m: strongest.map_or(f64::NAN, |p| p.range_m),
        excess_rsa: strongest.map_or(f64::NAN, |p| p.rsa),
        approach: approach_code(status),
    }
}

/// # Safety
/// `monitor` must be a live handle and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fsr_monitor_free(monitor: *mut FsrMonitor) {
    if !monitor.is_null() {
        drop(Box::from_raw(monitor));
    }
}

/// Safety state machine starting at the normal tier with the door open.
/// A NULL `config` selects the defaults (stop 1 m, slow 3 m, cap 0.25,
/// hysteresis 0.2 m).
///
/// # Safety
/// `config` must be valid or NULL; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_safety_new(config: *const FsrTierConfig, out: *mut *mut FsrSafety) -> FsrStatus {
    if out.is_null() {
        return null("out");
    }
    let config = match config.as_ref() {
        Some(c) => TierConfig {
            stop_range_m: c.stop_range_m,
            slow_range_m: c.slow_range_m,
            slow_speed_cap: c.slow_speed_cap,
            hysteresis_m: c.hysteresis_m,
            treat_unknown_as_human: c.treat_unknown_as_human,
        },
        None => TierConfig::default(),
    };
    if let Err(e) = config.validate() {
        return fail(e);
    }
    *out = boxed(FsrSafety {
        state: SafetyState::default(),
        config,
    });
    FsrStatus::Ok
}

/// Applies one scan's classified peaks. `classes[i]` is an `FSR_CLASS_*`
/// constant, `FSR_CLASS_UNKNOWN` for unclassified peaks.
///
/// # Safety
/// `safety` must be a live handle; `peaks` and `classes` must hold `n`
/// elements (either may be NULL when `n` is 0).
#[no_mangle]
pub unsafe extern "C" fn fsr_safety_update_tier(
    safety: *mut FsrSafety,
    peaks: *const FsrPeak,
    classes: *const i32,
    n: size_t,
) -> FsrStatus {
    guard(|| {
        let Some(s) = safety.as_mut() else {
            return null("safety");
        };
        if n > 0 && (peaks.is_null() || classes.is_null()) {
            return null("peaks or classes");
        }
        let mut input = Vec::with_capacity(n);
        for i in 0..n {
            let Some(class) = class_from(*classes.add(i)) else {
                set_error(format!("class code {} at index {i} is not valid", *classes.add(i)));
                return FsrStatus::InvalidArgument;
            };
            input.push(ClassifiedPeak::new(peak_in(&*peaks.add(i)), class));
        }
        s.state = update_tier(&s.state, &input, &s.config);
        FsrStatus::Ok
    })
}

/// Door entry is allowed exactly when the latest through-wall scan is clear.
///
/// # Safety
/// `safety` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fsr_safety_update_door(safety: *mut FsrSafety, occupied: bool, range_m: f64) -> FsrStatus {
    let Some(s) = safety.as_mut() else {
        return null("safety");
    };
    let report = OccupancyReport {
        occupied,
        detections: if occupied {
            vec![Peak {
                bin: 0,
                range_m,
                rsa: 1.0,
                prominence: 1.0,
            }]
        } else {
            Vec::new()
        },
        scan_index: 0,
        bin_spacing_m: 0.0,
    };
    s.state = update_door_policy(&s.state, &report);
    FsrStatus::Ok
}

/// # Safety
/// `safety` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsr_safety_get(safety: *const FsrSafety, out: *mut FsrSafetyView) -> FsrStatus {
    let (Some(s), false) = (safety.as_ref(), out.is_null()) else {
        return null("safety or out");
    };
    *out = FsrSafetyView {
        tier: match s.state.tier {
            Tier::Normal => FSR_TIER_NORMAL,
            Tier::Slow => FSR_TIER_SLOW,
            Tier::Stop => FSR_TIER_STOP,
        },
        speed_cap: s.state.speed_cap,
        door_entry_allowed: s.state.door_entry_allowed,
    };
    FsrStatus::Ok
}

/// Copies the safety-log line for `scan_index` into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the untruncated length.
///
/// # Safety
/// `safety` must be a live handle; `buf` must hold `len` bytes or be NULL
/// when `len` is 0.
#[no_mangle]
pub unsafe extern "C" fn fsr_safety_log_line(
    safety: *const FsrSafety,
    scan_index: size_t,
    buf: *mut c_char,
    len: size_t,
) -> size_t {
    let Some(s) = safety.as_ref() else {
        return 0;
    };
    let line = s.state.log_line(scan_index);
    if !buf.is_null() && len > 0 {
        let n = line.len().min(len - 1);
        ptr::copy_nonoverlapping(line.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
    }
    line.len()
}

/// # Safety
/// `safety` must be a live handle and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fsr_safety_free(safety: *mut FsrSafety) {
    if !safety.is_null() {
        drop(Box::from_raw(safety));
    }
}

/// Runs a built-in scenario and writes its artifacts under `out_dir`.
///
/// # Safety
/// `name` and `out_dir` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn fsr_run_builtin_scenario(name: *const c_char, out_dir: *const c_char) -> FsrStatus {
    guard(|| {
        let name = match c_str(name, "name") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let dir = match c_str(out_dir, "out_dir") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let result = scenario::builtin(name).and_then(|sc| scenario::run_scenario(&sc));
        match result.and_then(|r| scenario::write_run(&r, Path::new(dir))) {
            Ok(()) => FsrStatus::Ok,
            Err(e) => fail(e),
        }
    })
}
