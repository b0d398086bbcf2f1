//! Command-line front end. Exit codes: 0 success, 1 invalid input, 2 I/O.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::SceneFile;
use crate::error::{Error, Result};
use crate::profile::RangeProfile;
use crate::rrm::{self, ClassBands, ClassifiedReading};
use crate::safety::{update_door_policy, update_tier, ClassifiedPeak, SafetyState};
use crate::scenario::{self, derive_seed, reflection_readings, scene_profile, Scenario};
use crate::scene::Scene;
use crate::throughwall::{write_monitor_csv, MonitorZone, ThroughWallMonitor};

#[derive(Debug, Parser)]
#[command(name = "foresight", version, about = "FMCW radar foresight sensing: simulate, classify, monitor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a scene and write its range profile (profile.csv).
    Simulate(SceneArgs),
    /// Classify the peaks of a scene against an empty-reference baseline.
    Classify(ClassifyArgs),
    /// Through-wall occupancy for one or more scans of a corridor.
    Monitor(MonitorArgs),
    /// Run a built-in or file-defined scenario.
    Scenario(ScenarioArgs),
    /// Derive class bands from labelled RRM values (`rrm,label` CSV).
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Overrides the scene's rng_seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// key=value overrides, see the README for the accepted keys.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    #[arg(long, value_name = "PATH")]
    pub scene: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_name = "PATH")]
    pub scene: PathBuf,
    /// Empty-reference scene JSON or `range_m,rsa` profile CSV; defaults to
    /// the scene with its scatterers removed.
    #[arg(long, value_name = "PATH")]
    pub baseline: Option<PathBuf>,
    /// Bands JSON as written by `calibrate`.
    #[arg(long, value_name = "PATH")]
    pub bands: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MonitorArgs {
    /// Scene JSON per scan, in scan order.
    #[arg(long, value_name = "PATH", required = true, num_args = 1..)]
    pub scene: Vec<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub baseline: Option<PathBuf>,
    /// Corridor as `near,far` in meters.
    #[arg(long, value_name = "NEAR,FAR")]
    pub zone: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Built-in scenario: human_sweep, aluminium_sweep or copper_traverse.
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    pub name: Option<String>,
    /// Scenario JSON file.
    #[arg(long, value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// `rrm,label` CSV; defaults to the published table.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Classify(a) => classify(a),
        Command::Monitor(a) => monitor(a),
        Command::Scenario(a) => run_scenario(a),
        Command::Calibrate(a) => calibrate(a),
    }
}

fn load_setup(path: &Path, common: &Common) -> Result<SceneFile> {
    let mut setup = SceneFile::load(path)?;
    apply_common(&mut setup, common)?;
    Ok(setup)
}

fn apply_common(setup: &mut SceneFile, common: &Common) -> Result<()> {
    if let Some(seed) = common.seed {
        setup.scene.rng_seed = seed;
    }
    setup.apply_overrides(&common.overrides)?;
    setup.validate()
}

fn out_dir(dir: &Path) -> Result<&Path> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(dir)
}

fn create(path: PathBuf) -> Result<fs::File> {
    fs::File::create(&path).map_err(|e| Error::io(path, e))
}

fn simulate(a: &SceneArgs) -> Result<()> {
    let setup = load_setup(&a.scene, &a.common)?;
    let profile = scene_profile(&setup.scene, &setup)?;
    let dir = out_dir(&a.common.out)?;
    profile.write_csv(create(dir.join("profile.csv"))?)?;
    println!("{} bins written to {}", profile.len(), dir.join("profile.csv").display());
    Ok(())
}

/// Empty-reference profile from `--baseline` (scene JSON or profile CSV),
/// or from `fallback` with its scatterers removed.
fn baseline_profile(path: Option<&Path>, setup: &SceneFile, fallback: &Scene, common: &Common) -> Result<RangeProfile> {
    match path {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => {
            let f = fs::File::open(p).map_err(|e| Error::io(p, e))?;
            let profile = RangeProfile::read_csv(f, setup.chirp)?;
            let reference = scene_profile(&Scene::new(setup.scene.max_range_m), setup)?;
            if profile.len() != reference.len() {
                return Err(Error::ChirpMismatch);
            }
            Ok(profile)
        }
        Some(p) => {
            let mut base = SceneFile::load(p)?;
            apply_common(&mut base, common)?;
            if base.chirp != setup.chirp {
                return Err(Error::ChirpMismatch);
            }
            scene_profile(&base.scene, setup)
        }
        None => {
            let profiles = (0..setup.baseline.averages)
                .map(|j| {
                    let mut scene = fallback.empty_reference();
                    scene.noise_seed = Some(derive_seed(scene.rng_seed, "baseline", j as u64));
                    scene_profile(&scene, setup)
                })
                .collect::<Result<Vec<_>>>()?;
            RangeProfile::mean(&profiles)
        }
    }
}

fn load_bands(path: &Path) -> Result<ClassBands> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bands: ClassBands = serde_json::from_str(&text)?;
    bands.validate()?;
    Ok(bands)
}

fn classify(a: &ClassifyArgs) -> Result<()> {
    let mut setup = load_setup(&a.scene, &a.common)?;
    if let Some(p) = &a.bands {
        setup.classifier.bands = load_bands(p)?;
    }
    let base = baseline_profile(a.baseline.as_deref(), &setup, &setup.scene, &a.common)?;
    let baseline = rrm::capture_baseline(&[base.range_compensated()], setup.baseline.feature_range_hint)?;
    let scan = scene_profile(&setup.scene, &setup)?;
    let readings = reflection_readings(&scan, &baseline, setup.classifier.min_rrm)?;
    let rows: Vec<ClassifiedReading> = readings
        .into_iter()
        .map(|r| ClassifiedReading {
            class: rrm::classify(&r, &setup.classifier.bands),
            reading: r,
        })
        .collect();

    let dir = out_dir(&a.common.out)?;
    scan.write_csv(create(dir.join("profile.csv"))?)?;
    rrm::write_classification_csv(&rows, create(dir.join("classification.csv"))?)?;
    let peaks: Vec<_> = rows
        .iter()
        .map(|r| ClassifiedPeak::new(r.reading.target_peak, Some(r.class)))
        .collect();
    let state = update_tier(&SafetyState::default(), &peaks, &setup.safety);
    let mut log = create(dir.join("safety.log"))?;
    writeln!(log, "{}", state.log_line(0)).map_err(|e| Error::io(dir.join("safety.log"), e))?;

    for r in &rows {
        println!(
            "{:>8.3} m  rrm {:>8.3}  {}",
            r.reading.target_peak.range_m, r.reading.rrm, r.class
        );
    }
    Ok(())
}

fn parse_zone(text: &str, base: &MonitorZone) -> Result<MonitorZone> {
    let bad = || Error::config("--zone", format!("expected near,far in meters, got `{text}`"));
    let (near, far) = text.split_once(',').ok_or_else(bad)?;
    let near: f64 = near.trim().parse().map_err(|_| bad())?;
    let far: f64 = far.trim().parse().map_err(|_| bad())?;
    let zone = MonitorZone {
        near_m: near,
        far_m: far,
        ..*base
    };
    zone.validate()?;
    Ok(zone)
}

fn monitor(a: &MonitorArgs) -> Result<()> {
    let setups = a
        .scene
        .iter()
        .map(|p| load_setup(p, &a.common))
        .collect::<Result<Vec<_>>>()?;
    let first = &setups[0];
    let zone = match &a.zone {
        Some(z) => parse_zone(z, &first.monitor)?,
        None => first.monitor,
    };
    let base = baseline_profile(a.baseline.as_deref(), first, &first.scene, &a.common)?;
    let mut monitor = ThroughWallMonitor::new(base, zone)?;
    let mut state = SafetyState::default();
    let mut log = Vec::new();
    for (i, setup) in setups.iter().enumerate() {
        if setup.chirp != first.chirp {
            return Err(Error::ChirpMismatch);
        }
        let mut scene = setup.scene.clone();
        if scene.noise_seed.is_none() {
            scene.noise_seed = Some(derive_seed(scene.rng_seed, "scan", i as u64));
        }
        let scan = scene_profile(&scene, first)?;
        let (report, status) = monitor.ingest(&scan)?;
        state = update_door_policy(&state, report);
        log.push(state.log_line(i));
        match report.strongest() {
            Some(p) => println!("scan {i}: occupied at {:.3} m ({status})", p.range_m),
            None => println!("scan {i}: clear ({status})"),
        }
    }
    let dir = out_dir(&a.common.out)?;
    write_monitor_csv(monitor.reports(), create(dir.join("monitor.csv"))?)?;
    let mut f = create(dir.join("safety.log"))?;
    for line in log {
        writeln!(f, "{line}").map_err(|e| Error::io(dir.join("safety.log"), e))?;
    }
    Ok(())
}

fn run_scenario(a: &ScenarioArgs) -> Result<()> {
    let mut sc = match (&a.name, &a.scenario) {
        (Some(name), _) => scenario::builtin(name)?,
        (None, Some(path)) => Scenario::load(path)?,
        (None, None) => return Err(Error::config("--name", "give --name or --scenario")),
    };
    apply_common(&mut sc.setup, &a.common)?;
    sc.validate()?;
    let result = scenario::run_scenario(&sc)?;
    scenario::write_run(&result, &a.common.out)?;
    println!("{}: {} steps written to {}", result.scenario, result.steps.len(), a.common.out.display());
    if let Some(track) = &result.track {
        println!("approach: {}", track.status);
    }
    Ok(())
}

fn calibrate(a: &CalibrateArgs) -> Result<()> {
    let samples = match &a.input {
        Some(p) => {
            let f = fs::File::open(p).map_err(|e| Error::io(p, e))?;
            rrm::read_labeled_csv(f)?
        }
        None => rrm::reference_samples(),
    };
    let bands = rrm::calibrate_bands(&samples)?;
    let dir = out_dir(&a.out)?;
    let path = dir.join("bands.json");
    let mut text = serde_json::to_string_pretty(&bands)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    println!("infrastructure_max = {:.6}", bands.infrastructure_max);
    println!("human_max          = {:.6}", bands.human_max);
    Ok(())
}
