//! Scenario harness: a base scene, a list of per-step mutations and the
//! analysis stages to run on every step.
//!
//! Each step starts again from the base scene, so step `i` never sees the
//! mutations of step `j`. The base scene itself is the empty reference used
//! for the baseline. Every scan (baseline scans included) gets its own
//! noise realisation derived from the scene seed, while reflector phases stay
//! fixed by that seed.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::SceneFile;
use crate::error::{Error, Result};
use crate::profile::{range_profile, sig9, Peak, PeakThresholds, RangeProfile};
use crate::rrm::{self, Baseline, ClassifiedReading, RrmReading};
use crate::safety::{update_door_policy, update_tier, ClassifiedPeak, SafetyState};
use crate::scene::{Material, Scatterer, ScattererKind, Scene, Wall};
use crate::synth::synthesize_beat;
use crate::throughwall::{detect_occupancy, track_approach, write_monitor_csv, ApproachTrack, OccupancyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Profile,
    Rrm,
    Classify,
    Throughwall,
    Safety,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Profile => "profile",
            Stage::Rrm => "rrm",
            Stage::Classify => "classify",
            Stage::Throughwall => "throughwall",
            Stage::Safety => "safety",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Mutation {
    /// Moves an existing scatterer.
    Move { id: String, range_m: f64 },
    Add { scatterer: Scatterer },
    Remove { id: String },
}

impl Mutation {
    /// Scatterer this mutation places, if any.
    fn placed(&self) -> Option<(&str, f64)> {
        match self {
            Mutation::Move { id, range_m } => Some((id, *range_m)),
            Mutation::Add { scatterer } => Some((&scatterer.id, scatterer.range_m)),
            Mutation::Remove { .. } => None,
        }
    }

    fn apply(&self, scene: &mut Scene) -> Result<()> {
        match self {
            Mutation::Move { id, range_m } => {
                let s = scene
                    .scatterers
                    .iter_mut()
                    .find(|s| &s.id == id)
                    .ok_or_else(|| Error::TargetNotInScene(id.clone()))?;
                s.range_m = *range_m;
            }
            Mutation::Add { scatterer } => scene.scatterers.push(scatterer.clone()),
            Mutation::Remove { id } => {
                let before = scene.scatterers.len();
                scene.scatterers.retain(|s| &s.id != id);
                if scene.scatterers.len() == before {
                    return Err(Error::TargetNotInScene(id.clone()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub name: String,
    #[serde(default)]
    pub mutations: Vec<Mutation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub steps: Vec<Step>,
    #[serde(default = "default_pipeline")]
    pub pipeline: Vec<Stage>,
}

fn default_pipeline() -> Vec<Stage> {
    vec![Stage::Profile]
}

/// On-disk layout: a `scenario` block next to the usual scene-file sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub scenario: ScenarioSpec,
    #[serde(flatten)]
    pub setup: SceneFile,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn name(&self) -> &str {
        &self.scenario.name
    }

    pub fn runs(&self, stage: Stage) -> bool {
        self.scenario.pipeline.contains(&stage)
    }

    /// Scene of step `index`: base scene plus that step's mutations, with a
    /// noise stream of its own.
    pub fn step_scene(&self, index: usize) -> Result<Scene> {
        let step = &self.scenario.steps[index];
        let mut scene = self.setup.scene.clone();
        for m in &step.mutations {
            m.apply(&mut scene)?;
        }
        scene.noise_seed = Some(derive_seed(scene.rng_seed, "scan", index as u64));
        Ok(scene)
    }

    pub fn baseline_scenes(&self) -> Vec<Scene> {
        (0..self.setup.baseline.averages.max(1))
            .map(|j| {
                let mut scene = self.setup.scene.clone();
                scene.noise_seed = Some(derive_seed(scene.rng_seed, "baseline", j as u64));
                scene
            })
            .collect()
    }

    /// Checks the setup and every mutated step scene.
    pub fn validate(&self) -> Result<()> {
        self.setup.validate()?;
        for i in 0..self.scenario.steps.len() {
            let scene = self.step_scene(i).map_err(|e| stage_error(i, Stage::Profile, e))?;
            scene
                .validate()
                .into_result()
                .map_err(|e| stage_error(i, Stage::Profile, e))?;
        }
        Ok(())
    }
}

/// Seed for the `index`-th stream labelled `label` under `seed`.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    let d = h.finalize();
    let mut w = [0u8; 8];
    w.copy_from_slice(&d[..8]);
    u64::from_le_bytes(w)
}

fn stage_error(step: usize, stage: Stage, source: Error) -> Error {
    Error::Stage {
        step,
        stage: stage.name(),
        source: Box::new(source),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub name: String,
    /// Scatterer placed by this step and its true range.
    pub target: Option<(String, f64)>,
    pub profile: RangeProfile,
    pub peaks: Vec<Peak>,
    pub readings: Vec<RrmReading>,
    pub classified: Vec<ClassifiedReading>,
    pub occupancy: Option<OccupancyReport>,
    pub safety: Option<SafetyState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub scenario: String,
    pub pipeline: Vec<Stage>,
    pub baseline_profile: Option<RangeProfile>,
    pub steps: Vec<StepResult>,
    pub track: Option<ApproachTrack>,
}

impl RunResult {
    pub fn ran(&self, stage: Stage) -> bool {
        self.pipeline.contains(&stage)
    }
}

/// Raw (uncompensated) profile of a scene, cut at its max range.
pub fn scene_profile(scene: &Scene, setup: &SceneFile) -> Result<RangeProfile> {
    let beat = synthesize_beat(scene, &setup.chirp)?;
    Ok(range_profile(&beat, setup.classifier.window).truncated(scene.max_range_m))
}

/// Peaks of the range-compensated `scan` with their RRM against
/// `baseline`; peaks below `min_rrm` are dropped.
pub fn reflection_readings(scan: &RangeProfile, baseline: &Baseline, min_rrm: f64) -> Result<Vec<RrmReading>> {
    let floor = min_rrm * baseline.reference_feature.rsa;
    PeakThresholds::new(floor, floor)
        .detect(&scan.range_compensated())
        .iter()
        .map(|p| rrm::rrm(p, baseline))
        .collect()
}

struct Products {
    profile: RangeProfile,
    peaks: Vec<Peak>,
    readings: Vec<RrmReading>,
    classified: Vec<ClassifiedReading>,
    occupancy: Option<OccupancyReport>,
}

pub fn run_scenario(scenario: &Scenario) -> Result<RunResult> {
    let setup = &scenario.setup;
    setup.validate()?;
    let steps = &scenario.scenario.steps;
    let wants_rrm = scenario.runs(Stage::Rrm) || scenario.runs(Stage::Classify);
    let wants_baseline = wants_rrm || scenario.runs(Stage::Throughwall);

    let baseline_profile = if wants_baseline && !steps.is_empty() {
        let profiles = scenario
            .baseline_scenes()
            .iter()
            .map(|s| scene_profile(s, setup))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| stage_error(0, Stage::Profile, e))?;
        Some(RangeProfile::mean(&profiles)?)
    } else {
        None
    };
    let rrm_baseline = match (&baseline_profile, wants_rrm) {
        (Some(p), true) => Some(
            rrm::capture_baseline_labeled(
                &[p.range_compensated()],
                setup.baseline.feature_range_hint,
                "empty_reference",
            )
            .map_err(|e| stage_error(0, Stage::Rrm, e))?,
        ),
        _ => None,
    };

    let products: Vec<Products> = (0..steps.len())
        .into_par_iter()
        .map(|i| {
            let scene = scenario.step_scene(i).map_err(|e| stage_error(i, Stage::Profile, e))?;
            let profile = scene_profile(&scene, setup).map_err(|e| stage_error(i, Stage::Profile, e))?;
            let mut out = Products {
                peaks: Vec::new(),
                readings: Vec::new(),
                classified: Vec::new(),
                occupancy: None,
                profile,
            };
            if let Some(baseline) = &rrm_baseline {
                out.readings = reflection_readings(&out.profile, baseline, setup.classifier.min_rrm)
                    .map_err(|e| stage_error(i, Stage::Rrm, e))?;
                out.peaks = out.readings.iter().map(|r| r.target_peak).collect();
                if scenario.runs(Stage::Classify) {
                    out.classified = out
                        .readings
                        .iter()
                        .map(|r| ClassifiedReading {
                            class: rrm::classify(r, &setup.classifier.bands),
                            reading: r.clone(),
                        })
                        .collect();
                }
            }
            if scenario.runs(Stage::Throughwall) {
                let base = baseline_profile.as_ref().expect("baseline built for throughwall");
                out.occupancy = Some(
                    detect_occupancy(base, &out.profile, &setup.monitor, i)
                        .map_err(|e| stage_error(i, Stage::Throughwall, e))?,
                );
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut state = SafetyState::default();
    let mut results = Vec::with_capacity(steps.len());
    for (step, p) in steps.iter().zip(products) {
        let safety = if scenario.runs(Stage::Safety) {
            let classified: Vec<ClassifiedPeak> = if scenario.runs(Stage::Classify) {
                p.classified
                    .iter()
                    .map(|c| ClassifiedPeak::new(c.reading.target_peak, Some(c.class)))
                    .collect()
            } else {
                p.peaks.iter().map(|&pk| ClassifiedPeak::new(pk, None)).collect()
            };
            state = update_tier(&state, &classified, &setup.safety);
            if let Some(occ) = &p.occupancy {
                state = update_door_policy(&state, occ);
            }
            Some(state.clone())
        } else {
            None
        };
        results.push(StepResult {
            name: step.name.clone(),
            target: step
                .mutations
                .iter()
                .rev()
                .find_map(|m| m.placed())
                .map(|(id, r)| (id.to_owned(), r)),
            profile: p.profile,
            peaks: p.peaks,
            readings: p.readings,
            classified: p.classified,
            occupancy: p.occupancy,
            safety,
        });
    }

    let track = scenario.runs(Stage::Throughwall).then(|| {
        let reports: Vec<_> = results.iter().filter_map(|r| r.occupancy.clone()).collect();
        track_approach(&reports)
    });

    Ok(RunResult {
        scenario: scenario.scenario.name.clone(),
        pipeline: scenario.scenario.pipeline.clone(),
        baseline_profile,
        steps: results,
        track,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub step: String,
    pub true_range_m: Option<f64>,
    pub detected_range_m: Option<f64>,
    pub rrm: Option<f64>,
    pub class: Option<rrm::TargetClass>,
}

/// One row per step: the reading nearest the placed target (or the
/// strongest reading when the step places nothing).
pub fn summarize(result: &RunResult) -> Result<Vec<SummaryRow>> {
    if result.steps.is_empty() {
        return Ok(Vec::new());
    }
    if !result.ran(Stage::Rrm) && !result.ran(Stage::Classify) {
        return Err(Error::MissingStage("rrm"));
    }
    Ok(result
        .steps
        .iter()
        .map(|s| {
            let true_range = s.target.as_ref().map(|(_, r)| *r);
            let pick = match true_range {
                Some(t) => s.readings.iter().enumerate().min_by(|(_, a), (_, b)| {
                    (a.target_peak.range_m - t)
                        .abs()
                        .total_cmp(&(b.target_peak.range_m - t).abs())
                }),
                None => s
                    .readings
                    .iter()
                    .enumerate()
                    .max_by(|(_, a), (_, b)| a.rrm.total_cmp(&b.rrm)),
            };
            SummaryRow {
                step: s.name.clone(),
                true_range_m: true_range,
                detected_range_m: pick.map(|(_, r)| r.target_peak.range_m),
                rrm: pick.map(|(_, r)| r.rrm),
                class: pick.and_then(|(i, _)| s.classified.get(i).map(|c| c.class)),
            }
        })
        .collect())
}

/// `step,true_range_m,detected_range_m,rrm,class`.
pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], writer: W) -> Result<()> {
    let opt = |x: Option<f64>| x.map(sig9).unwrap_or_default();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["step", "true_range_m", "detected_range_m", "rrm", "class"])?;
    for r in rows {
        w.write_record([
            r.step.clone(),
            opt(r.true_range_m),
            opt(r.detected_range_m),
            opt(r.rrm),
            r.class.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

/// Writes every artifact of a run under `dir`:
/// `summary.csv`, `monitor.csv`, `safety.log`, `baseline_profile.csv` and
/// `step_NN/{profile,classification}.csv`, each only when its stage ran.
pub fn write_run(result: &RunResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if let Some(p) = &result.baseline_profile {
        p.write_csv(create(&dir.join("baseline_profile.csv"))?)?;
    }
    for (i, s) in result.steps.iter().enumerate() {
        let sub = dir.join(format!("step_{i:02}"));
        fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
        s.profile.write_csv(create(&sub.join("profile.csv"))?)?;
        if result.ran(Stage::Classify) {
            rrm::write_classification_csv(&s.classified, create(&sub.join("classification.csv"))?)?;
        }
    }
    if result.ran(Stage::Rrm) || result.ran(Stage::Classify) {
        write_summary_csv(&summarize(result)?, create(&dir.join("summary.csv"))?)?;
    }
    if result.ran(Stage::Throughwall) {
        let reports: Vec<_> = result.steps.iter().filter_map(|s| s.occupancy.clone()).collect();
        write_monitor_csv(&reports, create(&dir.join("monitor.csv"))?)?;
    }
    if result.ran(Stage::Safety) {
        let path = dir.join("safety.log");
        let mut f = create(&path)?;
        for (i, s) in result.steps.iter().enumerate() {
            if let Some(state) = &s.safety {
                writeln!(f, "{}", state.log_line(i)).map_err(|e| Error::io(&path, e))?;
            }
        }
    }
    Ok(())
}

pub const BUILTIN_NAMES: &[&str] = &["human_sweep", "aluminium_sweep", "copper_traverse"];

/// Laboratory with its back wall at 6 m.
pub fn lab_scene() -> Scene {
    Scene::new(8.0)
        .with_seed(2023)
        .with_noise(3.0e-5)
        .with_wall(Wall::new("back_wall", 6.0, Material::lab_wall()))
}

/// Radar 10 cm in front of a partition wall, hallway to a second wall.
pub fn corridor_scene() -> Scene {
    Scene::new(4.0)
        .with_seed(2023)
        .with_noise(5.0e-5)
        .with_wall(Wall::new("wall_1", 0.10, Material::plasterboard()))
        .with_wall(Wall::new("wall_2", 2.60, Material::plasterboard()))
}

/// Copper-sheet positions A–D, far to near.
pub const COPPER_POSITIONS: [(&str, f64); 4] = [("A", 2.2), ("B", 1.6), ("C", 1.0), ("D", 0.4)];

fn sweep(name: &str, target: Scatterer) -> Scenario {
    let steps = [1.0, 2.0, 3.0, 4.0]
        .iter()
        .map(|&r| {
            let mut s = target.clone();
            s.range_m = r;
            Step {
                name: format!("{}_{:.0}cm", target.id, r * 100.0),
                mutations: vec![Mutation::Add { scatterer: s }],
            }
        })
        .collect();
    Scenario {
        scenario: ScenarioSpec {
            name: name.to_owned(),
            steps,
            pipeline: vec![Stage::Profile, Stage::Rrm, Stage::Classify, Stage::Safety],
        },
        setup: SceneFile::new(lab_scene()),
    }
}

pub fn builtin(name: &str) -> Result<Scenario> {
    match name {
        "human_sweep" => Ok(sweep(
            "human_sweep",
            Scatterer::new("human", 1.0, Material::human(), ScattererKind::Human),
        )),
        "aluminium_sweep" => Ok(sweep(
            "aluminium_sweep",
            Scatterer::new("aluminium", 1.0, Material::aluminium(), ScattererKind::MetalSheet).with_extent(0.7, 0.5),
        )),
        "copper_traverse" => {
            let steps = COPPER_POSITIONS
                .iter()
                .map(|&(label, r)| Step {
                    name: format!("position_{label}"),
                    mutations: vec![Mutation::Add {
                        scatterer: Scatterer::new("copper_sheet", r, Material::copper(), ScattererKind::MetalSheet)
                            .with_extent(0.3, 0.3),
                    }],
                })
                .collect();
            let setup = SceneFile::new(corridor_scene());
            Ok(Scenario {
                scenario: ScenarioSpec {
                    name: "copper_traverse".to_owned(),
                    steps,
                    pipeline: vec![Stage::Profile, Stage::Throughwall, Stage::Safety],
                },
                setup,
            })
        }
        other => Err(Error::UnknownScenario(other.to_owned())),
    }
}
