//! Deterministic FMCW radar simulation and detection for robot safety.
//!
//! The pipeline runs from a declarative [`scene::Scene`] through beat-signal
//! synthesis ([`synth`]) and range profiling ([`profile`]) to three
//! consumers:
//!
//! * [`rrm`]: relative reflection magnitude against an empty-reference
//!   feature, classified as infrastructure, human or metallic;
//! * [`throughwall`]: occupancy of a corridor behind a wall by differencing
//!   against an empty-corridor baseline;
//! * [`safety`]: tiered speed caps on human proximity and a door-entry flag.
//!
//! [`scenario`] strings these together into reproducible experiments.

pub mod cli;
pub mod config;
pub mod error;
pub mod profile;
pub mod rrm;
pub mod safety;
pub mod scenario;
pub mod scene;
pub mod synth;
pub mod throughwall;

pub use config::SceneFile;
pub use error::{Error, Result};
pub use profile::{detect_peaks, naive_spectrum, range_profile, Peak, PeakThresholds, RangeProfile, Window};
pub use rrm::{calibrate_bands, capture_baseline, classify, rrm, Baseline, ClassBands, RrmReading, TargetClass};
pub use safety::{update_door_policy, update_tier, ClassifiedPeak, SafetyState, Tier, TierConfig};
pub use scenario::{run_scenario, summarize, RunResult, Scenario};
pub use scene::{validate_scene, Material, Scatterer, ScattererKind, Scene, ValidationReport, Wall};
pub use synth::{beat_frequency, range_resolution, synthesize_beat, BeatSignal, ChirpConfig};
pub use throughwall::{detect_occupancy, track_approach, ApproachStatus, ApproachTrack, MonitorZone, OccupancyReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
