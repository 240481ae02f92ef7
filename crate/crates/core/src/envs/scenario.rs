use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geometry::Circle;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const AERIAL_TRAIN: &str = "aerial-train";
pub const AERIAL_EVAL: &str = "aerial-eval";
pub const TERRESTRIAL_TRAIN: &str = "terrestrial-train";
pub const TERRESTRIAL_EVAL: &str = "terrestrial-eval";

/// Square arena centered at the origin with circular obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub name: String,
    pub arena_half_extent: T,
    pub obstacles: Vec<Circle<T>>,
}

/// On-disk scenario description (TOML).
///
/// ```toml
/// name = "two-pillars"
/// arena_half_extent = 2.5
///
/// [[obstacle]]
/// x = 0.0
/// y = 1.1
/// radius = 0.5
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub arena_half_extent: f64,
    #[serde(default, rename = "obstacle")]
    pub obstacles: Vec<Circle<f64>>,
}

impl<T: Scalar> Scenario<T> {
    pub fn new(name: impl Into<String>, arena_half_extent: T, obstacles: Vec<Circle<T>>) -> Result<Self> {
        let s = Self {
            name: name.into(),
            arena_half_extent,
            obstacles,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.arena_half_extent;
        if !(h > T::zero() && h.is_finite()) {
            return Err(Error::Config(format!(
                "scenario `{}`: arena half extent must be positive",
                self.name
            )));
        }
        for (i, c) in self.obstacles.iter().enumerate() {
            if !(c.radius > T::zero() && c.radius.is_finite()) {
                return Err(Error::Config(format!(
                    "scenario `{}`: obstacle {i} radius must be positive",
                    self.name
                )));
            }
            if !(c.x.abs() + c.radius < h && c.y.abs() + c.radius < h) {
                return Err(Error::Config(format!(
                    "scenario `{}`: obstacle {i} is not strictly inside the arena",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Smallest distance from a point to any obstacle surface or arena wall.
    pub fn clearance(&self, x: T, y: T) -> T {
        let h = self.arena_half_extent;
        let wall = (h - x.abs()).min(h - y.abs());
        self.obstacles
            .iter()
            .map(|c| c.surface_distance(x, y))
            .fold(wall, T::min)
    }

    pub fn diagonal(&self) -> T {
        let side = self.arena_half_extent + self.arena_half_extent;
        side * T::SQRT_2()
    }

    pub fn from_file_contents(text: &str) -> Result<Self> {
        let f: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("scenario file: {e}")))?;
        Scenario::new(
            f.name,
            T::of(f.arena_half_extent),
            f.obstacles
                .into_iter()
                .map(|c| Circle::new(T::of(c.x), T::of(c.y), T::of(c.radius)))
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_file_contents(&std::fs::read_to_string(path)?)
    }

    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            name: self.name.clone(),
            arena_half_extent: self.arena_half_extent.as_f64(),
            obstacles: self
                .obstacles
                .iter()
                .map(|c| Circle::new(c.x.as_f64(), c.y.as_f64(), c.radius.as_f64()))
                .collect(),
        }
    }
}

/// The two aerial arenas (10 m square) and the two terrestrial arenas (5 m square).
pub fn builtin_scenarios<T: Scalar>() -> Vec<Scenario<T>> {
    let c = |x: f64, y: f64| Circle::new(T::of(x), T::of(y), T::of(0.5));
    vec![
        Scenario {
            name: AERIAL_TRAIN.into(),
            arena_half_extent: T::of(5.0),
            obstacles: vec![c(2.0, 2.0), c(-2.0, 2.0), c(-2.0, -2.0), c(2.0, -2.0)],
        },
        Scenario {
            name: AERIAL_EVAL.into(),
            arena_half_extent: T::of(5.0),
            obstacles: vec![c(0.0, 0.0)],
        },
        Scenario {
            name: TERRESTRIAL_TRAIN.into(),
            arena_half_extent: T::of(2.5),
            obstacles: vec![c(0.0, 1.1), c(-1.1, -0.8), c(1.1, -0.8)],
        },
        Scenario {
            name: TERRESTRIAL_EVAL.into(),
            arena_half_extent: T::of(2.5),
            obstacles: vec![c(1.25, 1.25), c(-1.25, 1.25), c(-1.25, -1.25), c(1.25, -1.25)],
        },
    ]
}

pub fn builtin_scenario<T: Scalar>(name: &str) -> Result<Scenario<T>> {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

/// A builtin name, or else a path to a scenario file.
pub fn resolve_scenario<T: Scalar>(name_or_path: &str) -> Result<Scenario<T>> {
    match builtin_scenario(name_or_path) {
        Ok(s) => Ok(s),
        Err(_) if Path::new(name_or_path).is_file() => Scenario::load(name_or_path),
        Err(e) => Err(e),
    }
}
