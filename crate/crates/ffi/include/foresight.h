#ifndef FORESIGHT_H
#define FORESIGHT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define FSR_CLASS_UNKNOWN -1

#define FSR_CLASS_INFRASTRUCTURE 0

#define FSR_CLASS_HUMAN 1

#define FSR_CLASS_METALLIC 2

#define FSR_TIER_NORMAL 0

#define FSR_TIER_SLOW 1

#define FSR_TIER_STOP 2

#define FSR_APPROACH_EMPTY 0

#define FSR_APPROACH_STATIC 1

#define FSR_APPROACH_APPROACHING 2

#define FSR_APPROACH_RECEDING 3

typedef enum FsrStatus {
  FSR_STATUS_OK = 0,
  FSR_STATUS_NULL_POINTER = 1,
  FSR_STATUS_INVALID_ARGUMENT = 2,
  FSR_STATUS_INVALID_SCENE = 3,
  FSR_STATUS_NOT_FOUND = 4,
  FSR_STATUS_IO = 5,
  FSR_STATUS_BUFFER_TOO_SMALL = 6,
  FSR_STATUS_PANIC = 7,
} FsrStatus;

typedef struct FsrBaseline FsrBaseline;

typedef struct FsrMonitor FsrMonitor;

typedef struct FsrProfile FsrProfile;

typedef struct FsrSafety FsrSafety;

// Parsed scene file (scene, chirp and analysis settings).
typedef struct FsrScene FsrScene;

typedef struct FsrPeak {
  size_t bin;
  double range_m;
  double rsa;
  double prominence;
} FsrPeak;

typedef struct FsrBands {
  double infrastructure_max;
  double human_max;
} FsrBands;

typedef struct FsrZone {
  double near_m;
  double far_m;
  double excess_threshold;
  size_t guard_bins;
} FsrZone;

typedef struct FsrOccupancy {
  bool occupied;
  size_t scan_index;
  // Strongest detection; NaN when unoccupied.
  double range_m;
  double excess_rsa;
  // One of the `FSR_APPROACH_*` constants, over all scans so far.
  int32_t approach;
} FsrOccupancy;

typedef struct FsrTierConfig {
  double stop_range_m;
  double slow_range_m;
  double slow_speed_cap;
  double hysteresis_m;
  bool treat_unknown_as_human;
} FsrTierConfig;

typedef struct FsrSafetyView {
  // One of the `FSR_TIER_*` constants.
  int32_t tier;
  double speed_cap;
  bool door_entry_allowed;
} FsrSafetyView;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *fsr_version(void);

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next failing call on the same thread.
const char *fsr_last_error(void);

// Parses and validates a scene file from a JSON string.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum FsrStatus fsr_scene_from_json(const char *json, struct FsrScene **out);

// # Safety
// `scene` must come from [`fsr_scene_from_json`] and not be used afterwards.
void fsr_scene_free(struct FsrScene *scene);

// Overrides the scene's rng seed.
//
// # Safety
// `scene` must be a live handle.
enum FsrStatus fsr_scene_set_seed(struct FsrScene *scene, uint64_t seed);

// Renders the scene into a range profile cut at its max range.
//
// # Safety
// `scene` must be a live handle; `out` must be writable.
enum FsrStatus fsr_scene_profile(const struct FsrScene *scene, struct FsrProfile **out);

// Profile of the scene with every scatterer removed: the empty reference.
//
// # Safety
// `scene` must be a live handle; `out` must be writable.
enum FsrStatus fsr_scene_reference_profile(const struct FsrScene *scene, struct FsrProfile **out);

// # Safety
// `profile` must be a live handle or NULL.
size_t fsr_profile_len(const struct FsrProfile *profile);

// # Safety
// `profile` must be a live handle; `range_m` and `rsa` must be writable.
enum FsrStatus fsr_profile_bin(const struct FsrProfile *profile,
                               size_t index,
                               double *range_m,
                               double *rsa);

// New profile with every bin scaled by `(range / 1 m)²`.
//
// # Safety
// `profile` must be a live handle; `out` must be writable.
enum FsrStatus fsr_profile_range_compensated(const struct FsrProfile *profile,
                                             struct FsrProfile **out);

// # Safety
// `profile` must be a live handle and not be used afterwards.
void fsr_profile_free(struct FsrProfile *profile);

// Writes up to `capacity` peaks to `out` and the total count to `count`.
// Returns `BufferTooSmall` when `capacity < *count`; the first `capacity`
// peaks are still written.
//
// # Safety
// `profile` must be a live handle; `out` must hold `capacity` peaks (may be
// NULL when `capacity` is 0); `count` must be writable.
enum FsrStatus fsr_detect_peaks(const struct FsrProfile *profile,
                                double min_prominence,
                                double min_rsa,
                                struct FsrPeak *out,
                                size_t capacity,
                                size_t *count);

// Averages `n` profiles into a baseline whose reference feature is the
// highest peak within three bins of `feature_range_hint`.
//
// # Safety
// `profiles` must point to `n` live profile handles; `out` must be writable.
enum FsrStatus fsr_baseline_capture(const struct FsrProfile *const *profiles,
                                    size_t n,
                                    double feature_range_hint,
                                    struct FsrBaseline **out);

// # Safety
// `baseline` must be a live handle; `out` must be writable.
enum FsrStatus fsr_baseline_reference(const struct FsrBaseline *baseline, struct FsrPeak *out);

// # Safety
// `baseline` must be a live handle and not be used afterwards.
void fsr_baseline_free(struct FsrBaseline *baseline);

// Relative reflection magnitude: target RSA over the reference feature RSA.
//
// # Safety
// All pointers must be valid.
enum FsrStatus fsr_rrm(const struct FsrPeak *peak, const struct FsrBaseline *baseline, double *out);

// # Safety
// `out` must be writable.
enum FsrStatus fsr_default_bands(struct FsrBands *out);

// Writes one of the `FSR_CLASS_*` constants to `out`.
//
// # Safety
// `bands` and `out` must be valid.
enum FsrStatus fsr_classify(double rrm_value, const struct FsrBands *bands, int32_t *out);

// Geometric-mean cutpoints from `n` labelled RRM values.
//
// # Safety
// `rrm_values` and `classes` must each hold `n` elements; `out` must be
// writable.
enum FsrStatus fsr_calibrate_bands(const double *rrm_values,
                                   const int32_t *classes,
                                   size_t n,
                                   struct FsrBands *out);

// Streaming through-wall monitor over `baseline` (an empty-corridor
// profile, copied).
//
// # Safety
// `baseline` and `zone` must be valid; `out` must be writable.
enum FsrStatus fsr_monitor_new(const struct FsrProfile *baseline,
                               const struct FsrZone *zone,
                               struct FsrMonitor **out);

// # Safety
// `monitor` must be a live handle used by one thread at a time; `scan` a
// live profile; `out` writable.
enum FsrStatus fsr_monitor_ingest(struct FsrMonitor *monitor,
                                  const struct FsrProfile *scan,
                                  struct FsrOccupancy *out);

// # Safety
// `monitor` must be a live handle and not be used afterwards.
void fsr_monitor_free(struct FsrMonitor *monitor);

// Safety state machine starting at the normal tier with the door open.
// A NULL `config` selects the defaults (stop 1 m, slow 3 m, cap 0.25,
// hysteresis 0.2 m).
//
// # Safety
// `config` must be valid or NULL; `out` must be writable.
enum FsrStatus fsr_safety_new(const struct FsrTierConfig *config, struct FsrSafety **out);

// Applies one scan's classified peaks. `classes[i]` is an `FSR_CLASS_*`
// constant, `FSR_CLASS_UNKNOWN` for unclassified peaks.
//
// # Safety
// `safety` must be a live handle; `peaks` and `classes` must hold `n`
// elements (either may be NULL when `n` is 0).
enum FsrStatus fsr_safety_update_tier(struct FsrSafety *safety,
                                      const struct FsrPeak *peaks,
                                      const int32_t *classes,
                                      size_t n);

// Door entry is allowed exactly when the latest through-wall scan is clear.
//
// # Safety
// `safety` must be a live handle.
enum FsrStatus fsr_safety_update_door(struct FsrSafety *safety, bool occupied, double range_m);

// # Safety
// `safety` must be a live handle; `out` must be writable.
enum FsrStatus fsr_safety_get(const struct FsrSafety *safety, struct FsrSafetyView *out);

// Copies the safety-log line for `scan_index` into `buf` (NUL-terminated,
// truncated to `len - 1` bytes) and returns the untruncated length.
//
// # Safety
// `safety` must be a live handle; `buf` must hold `len` bytes or be NULL
// when `len` is 0.
size_t fsr_safety_log_line(const struct FsrSafety *safety,
                           size_t scan_index,
                           char *buf,
                           size_t len);

// # Safety
// `safety` must be a live handle and not be used afterwards.
void fsr_safety_free(struct FsrSafety *safety);

// Runs a built-in scenario and writes its artifacts under `out_dir`.
//
// # Safety
// `name` and `out_dir` must be NUL-terminated strings.
enum FsrStatus fsr_run_builtin_scenario(const char *name, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FORESIGHT_H */
