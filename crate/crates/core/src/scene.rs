//! Declarative 1-D world model rendered by the simulator.
//!
//! Everything lies on the radar boresight: scatterers and walls are placed by
//! down-range distance only. Walls reflect like any other target and also
//! attenuate everything behind them by their two-way transmissivity.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference range for the spreading law, in meters.
pub const REFERENCE_RANGE_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// Amplitude reflection coefficient, `>= 0`.
    pub reflectivity: f64,
    /// One-way amplitude transmission coefficient in `[0, 1]`.
    pub transmissivity: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, reflectivity: f64, transmissivity: f64) -> Self {
        Self {
            name: name.into(),
            reflectivity,
            transmissivity,
        }
    }

    pub fn plasterboard() -> Self {
        Self::new("plasterboard", 0.05, 0.7)
    }

    pub fn lab_wall() -> Self {
        Self::new("lab_wall", 0.05, 0.7)
    }

    pub fn human() -> Self {
        Self::new("human", 0.08, 0.3)
    }

    pub fn aluminium() -> Self {
        Self::new("aluminium", 0.9, 0.0)
    }

    pub fn copper() -> Self {
        Self::new("copper", 0.9, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScattererKind {
    Human,
    MetalSheet,
    Infrastructure,
    Generic,
}

/// A point target. `kind` is ground truth for tests and reports only; the
/// detection pipeline never reads it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub id: String,
    pub range_m: f64,
    pub material: Material,
    #[serde(default = "default_kind")]
    pub kind: ScattererKind,
    /// Physical size (width, height) in meters; informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent_m: Option<[f64; 2]>,
}

fn default_kind() -> ScattererKind {
    ScattererKind::Generic
}

impl Scatterer {
    pub fn new(id: impl Into<String>, range_m: f64, material: Material, kind: ScattererKind) -> Self {
        Self {
            id: id.into(),
            range_m,
            material,
            kind,
            extent_m: None,
        }
    }

    pub fn with_extent(mut self, width_m: f64, height_m: f64) -> Self {
        self.extent_m = Some([width_m, height_m]);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub id: String,
    pub range_m: f64,
    pub material: Material,
}

impl Wall {
    pub fn new(id: impl Into<String>, range_m: f64, material: Material) -> Self {
        Self {
            id: id.into(),
            range_m,
            material,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    #[serde(default)]
    pub scatterers: Vec<Scatterer>,
    #[serde(default)]
    pub walls: Vec<Wall>,
    pub max_range_m: f64,
    #[serde(default)]
    pub noise_amplitude: f64,
    #[serde(default)]
    pub rng_seed: u64,
    /// Seed for the receiver noise stream. Defaults to `rng_seed`; set it to
    /// take a fresh noise realisation of an otherwise identical scene.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_seed: Option<u64>,
}

/// One reflecting element of a scene, wall or scatterer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflector<'a> {
    pub id: &'a str,
    pub range_m: f64,
    pub amplitude: f64,
}

impl Scene {
    pub fn new(max_range_m: f64) -> Self {
        Self {
            scatterers: Vec::new(),
            walls: Vec::new(),
            max_range_m,
            noise_amplitude: 0.0,
            rng_seed: 0,
            noise_seed: None,
        }
    }

    pub fn with_scatterer(mut self, scatterer: Scatterer) -> Self {
        self.scatterers.push(scatterer);
        self
    }

    /// Adds a wall keeping the wall list sorted by range.
    pub fn with_wall(mut self, wall: Wall) -> Self {
        let at = self.walls.partition_point(|w| w.range_m <= wall.range_m);
        self.walls.insert(at, wall);
        self
    }

    pub fn with_noise(mut self, noise_amplitude: f64) -> Self {
        self.noise_amplitude = noise_amplitude;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn effective_noise_seed(&self) -> u64 {
        self.noise_seed.unwrap_or(self.rng_seed)
    }

    pub fn scatterer(&self, id: &str) -> Option<&Scatterer> {
        self.scatterers.iter().find(|s| s.id == id)
    }

    /// Returns a copy of the scene with every scatterer removed: the empty
    /// reference for baseline capture.
    pub fn empty_reference(&self) -> Scene {
        Scene {
            scatterers: Vec::new(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_scene(self)
    }

    /// Two-way received amplitude of the wall or scatterer named `id`.
    pub fn effective_amplitude(&self, id: &str) -> Result<f64> {
        if let Some(s) = self.scatterers.iter().find(|s| s.id == id) {
            return Ok(self.amplitude_at(s.material.reflectivity, s.range_m));
        }
        if let Some(w) = self.walls.iter().find(|w| w.id == id) {
            return Ok(self.amplitude_at(w.material.reflectivity, w.range_m));
        }
        Err(Error::TargetNotInScene(id.to_owned()))
    }

    /// `reflectivity × Π t² (walls strictly nearer) × (r0 / range)²`.
    fn amplitude_at(&self, reflectivity: f64, range_m: f64) -> f64 {
        let transmission: f64 = self
            .walls
            .iter()
            .filter(|w| w.range_m < range_m)
            .map(|w| w.material.transmissivity * w.material.transmissivity)
            .product();
        let spreading = (REFERENCE_RANGE_M / range_m).powi(2);
        reflectivity * transmission * spreading
    }

    /// Walls followed by scatterers, each with its effective amplitude.
    pub fn reflectors(&self) -> Vec<Reflector<'_>> {
        let walls = self.walls.iter().map(|w| (w.id.as_str(), w.range_m, w.material.reflectivity));
        let scatterers = self
            .scatterers
            .iter()
            .map(|s| (s.id.as_str(), s.range_m, s.material.reflectivity));
        walls
            .chain(scatterers)
            .map(|(id, range_m, reflectivity)| Reflector {
                id,
                range_m,
                amplitude: self.amplitude_at(reflectivity, range_m),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, message: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(message))
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidScene(self))
        }
    }

    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_scene(scene: &Scene) -> ValidationReport {
    let mut report = ValidationReport::default();

    if !(scene.max_range_m.is_finite() && scene.max_range_m > 0.0) {
        report.push("scene.max_range_m", "must be finite and > 0");
    }
    if !(scene.noise_amplitude.is_finite() && scene.noise_amplitude >= 0.0) {
        report.push("scene.noise_amplitude", "negative coefficient");
    }

    let mut ids = HashSet::new();
    let mut check = |report: &mut ValidationReport, field: String, id: &str, range_m: f64, material: &Material| {
        if !ids.insert(id.to_owned()) {
            report.push(format!("{field}.id"), format!("duplicate id `{id}`"));
        }
        if !(range_m.is_finite() && range_m > 0.0) {
            report.push(format!("{field}.range_m"), "range must be > 0");
        } else if range_m >= scene.max_range_m {
            report.push(
                format!("{field}.range_m"),
                format!("out of bounds: {range_m} m ≥ max_range {} m", scene.max_range_m),
            );
        }
        let m = material;
        if !(m.reflectivity.is_finite() && m.reflectivity >= 0.0) {
            report.push(format!("{field}.material.reflectivity"), "negative coefficient");
        }
        if !(m.transmissivity.is_finite() && (0.0..=1.0).contains(&m.transmissivity)) {
            report.push(
                format!("{field}.material.transmissivity"),
                "negative coefficient or transmissivity outside [0, 1]",
            );
        }
    };

    for (i, w) in scene.walls.iter().enumerate() {
        check(&mut report, format!("scene.walls[{i}]"), &w.id, w.range_m, &w.material);
    }
    for (i, s) in scene.scatterers.iter().enumerate() {
        check(&mut report, format!("scene.scatterers[{i}]"), &s.id, s.range_m, &s.material);
    }

    for (i, pair) in scene.walls.windows(2).enumerate() {
        let (a, b) = (pair[0].range_m, pair[1].range_m);
        if a == b {
            report.push(format!("scene.walls[{}].range_m", i + 1), format!("duplicate wall range {a} m"));
        } else if a > b {
            report.push(
                format!("scene.walls[{}].range_m", i + 1),
                "walls not sorted by range ascending",
            );
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn unit() -> Material {
        Material::new("unit", 1.0, 1.0)
    }

    #[test]
    fn empty_scene_is_valid() {
        assert!(validate_scene(&Scene::new(8.0)).is_ok());
    }

    #[test]
    fn scatterer_beyond_max_range_is_out_of_bounds() {
        let scene = Scene::new(8.0).with_scatterer(Scatterer::new("s", 9.0, unit(), ScattererKind::Generic));
        let report = validate_scene(&scene);
        assert!(report.contains("out of bounds"), "{report}");
        assert_eq!(report.violations[0].field, "scene.scatterers[0].range_m");
    }

    #[test]
    fn duplicate_wall_range() {
        let scene = Scene::new(8.0)
            .with_wall(Wall::new("a", 0.1, Material::plasterboard()))
            .with_wall(Wall::new("b", 0.1, Material::plasterboard()));
        assert!(validate_scene(&scene).contains("duplicate wall range"));
    }

    #[test]
    fn unsorted_walls_and_bad_coefficients() {
        let mut scene = Scene::new(8.0);
        scene.walls = vec![
            Wall::new("far", 3.0, Material::new("x", -0.1, 0.5)),
            Wall::new("near", 1.0, Material::new("y", 0.1, 1.5)),
        ];
        let report = validate_scene(&scene);
        assert!(report.contains("not sorted"));
        assert!(report.contains("negative coefficient"));
        assert!(report.contains("outside [0, 1]"));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let scene = Scene::new(8.0)
            .with_wall(Wall::new("x", 1.0, Material::plasterboard()))
            .with_scatterer(Scatterer::new("x", 2.0, Material::human(), ScattererKind::Human));
        assert!(validate_scene(&scene).contains("duplicate id"));
    }

    #[test]
    fn effective_amplitude_examples() {
        let one_m = Scene::new(8.0).with_scatterer(Scatterer::new("s", 1.0, unit(), ScattererKind::Generic));
        assert_relative_eq!(one_m.effective_amplitude("s").unwrap(), 1.0);

        let two_m = Scene::new(8.0).with_scatterer(Scatterer::new("s", 2.0, unit(), ScattererKind::Generic));
        assert_relative_eq!(two_m.effective_amplitude("s").unwrap(), 0.25);

        let behind = two_m.with_wall(Wall::new("w", 1.0, Material::new("w", 0.0, 0.8)));
        assert_relative_eq!(behind.effective_amplitude("s").unwrap(), 0.16, epsilon = 1e-15);
    }

    #[test]
    fn wall_does_not_attenuate_itself_or_nearer_targets() {
        let scene = Scene::new(8.0)
            .with_wall(Wall::new("w", 2.0, Material::new("w", 1.0, 0.5)))
            .with_scatterer(Scatterer::new("s", 1.0, unit(), ScattererKind::Generic));
        assert_relative_eq!(scene.effective_amplitude("w").unwrap(), 0.25);
        assert_relative_eq!(scene.effective_amplitude("s").unwrap(), 1.0);
    }

    #[test]
    fn unknown_target_is_an_error() {
        assert!(matches!(
            Scene::new(8.0).effective_amplitude("ghost"),
            Err(Error::TargetNotInScene(id)) if id == "ghost"
        ));
    }

    #[test]
    fn zero_transmissivity_blocks_everything_behind() {
        let scene = Scene::new(8.0)
            .with_wall(Wall::new("w", 1.0, Material::new("metal", 0.9, 0.0)))
            .with_scatterer(Scatterer::new("s", 2.0, unit(), ScattererKind::Generic));
        assert_eq!(scene.effective_amplitude("s").unwrap(), 0.0);
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        fn walls() -> impl Strategy<Value = Vec<(f64, f64)>> {
            prop::collection::vec((0.1f64..7.0, 0.0f64..=1.0), 0..4)
        }

        fn scene_with(walls: &[(f64, f64)], target_range: f64, reflectivity: f64) -> Scene {
            let mut scene = Scene::new(8.0).with_scatterer(Scatterer::new(
                "t",
                target_range,
                Material::new("m", reflectivity, 1.0),
                ScattererKind::Generic,
            ));
            for (i, &(r, t)) in walls.iter().enumerate() {
                scene = scene.with_wall(Wall::new(format!("w{i}"), r, Material::new("w", 0.05, t)));
            }
            scene
        }

        proptest! {
            #[test]
            fn non_increasing_in_range(ws in walls(), r1 in 0.1f64..7.9, r2 in 0.1f64..7.9, refl in 0.0f64..2.0) {
                let (near, far) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
                let a_near = scene_with(&ws, near, refl).effective_amplitude("t").unwrap();
                let a_far = scene_with(&ws, far, refl).effective_amplitude("t").unwrap();
                prop_assert!(a_far <= a_near);
            }

            #[test]
            fn removing_a_wall_never_decreases(ws in walls(), r in 0.1f64..7.9, refl in 0.0f64..2.0, drop in 0usize..4) {
                let full = scene_with(&ws, r, refl).effective_amplitude("t").unwrap();
                let mut fewer = ws.clone();
                if !fewer.is_empty() {
                    fewer.remove(drop % fewer.len());
                }
                let without = scene_with(&fewer, r, refl).effective_amplitude("t").unwrap();
                prop_assert!(without >= full);
            }

            #[test]
            fn transparent_walls_reduce_to_spreading_law(ranges in prop::collection::vec(0.1f64..7.0, 0..4), r in 0.1f64..7.9, refl in 0.0f64..2.0) {
                let ws: Vec<_> = ranges.iter().map(|&x| (x, 1.0)).collect();
                let a = scene_with(&ws, r, refl).effective_amplitude("t").unwrap();
                prop_assert!((a - refl / (r * r)).abs() <= 1e-12 * (refl / (r * r)).max(1e-300));
            }
        }
    }
}
