use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::Td3Config;
use crate::envs::{resolve_scenario, EnvSpec, Mode, Scenario, AERIAL_EVAL, AERIAL_TRAIN, TERRESTRIAL_EVAL, TERRESTRIAL_TRAIN};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::ActionBox;

/// `[env]` section: task mode, scenarios, and optional overrides of every [`EnvSpec`] field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    pub mode: Mode,
    /// Builtin scenario name or path to a scenario file; defaults per mode.
    pub train_scenario: Option<String>,
    pub eval_scenario: Option<String>,
    pub beam_count: Option<usize>,
    pub fov_degrees: Option<f64>,
    pub lidar_max_range: Option<f64>,
    pub action_low: Option<Vec<f64>>,
    pub action_high: Option<Vec<f64>>,
    pub r_arrive: Option<f64>,
    pub r_collide: Option<f64>,
    pub goal_radius: Option<f64>,
    pub collision_distance: Option<f64>,
    pub max_episode_steps: Option<u32>,
    pub dt: Option<f64>,
    pub z_min: Option<f64>,
    pub z_max: Option<f64>,
}

impl Default for EnvSection {
    fn default() -> Self {
        Self::for_mode(Mode::Terrestrial)
    }
}

impl EnvSection {
    pub fn for_mode(mode: Mode) -> Self {
        Self {
            mode,
            train_scenario: None,
            eval_scenario: None,
            beam_count: None,
            fov_degrees: None,
            lidar_max_range: None,
            action_low: None,
            action_high: None,
            r_arrive: None,
            r_collide: None,
            goal_radius: None,
            collision_distance: None,
            max_episode_steps: None,
            dt: None,
            z_min: None,
            z_max: None,
        }
    }

    pub fn train_scenario_name(&self) -> &str {
        self.train_scenario.as_deref().unwrap_or(match self.mode {
            Mode::Aerial => AERIAL_TRAIN,
            Mode::Terrestrial => TERRESTRIAL_TRAIN,
        })
    }

    pub fn eval_scenario_name(&self) -> &str {
        self.eval_scenario.as_deref().unwrap_or(match self.mode {
            Mode::Aerial => AERIAL_EVAL,
            Mode::Terrestrial => TERRESTRIAL_EVAL,
        })
    }

    pub fn train_scenario<T: Scalar>(&self) -> Result<Scenario<T>> {
        resolve_scenario(self.train_scenario_name())
    }

    pub fn eval_scenario<T: Scalar>(&self) -> Result<Scenario<T>> {
        resolve_scenario(self.eval_scenario_name())
    }

    /// Mode defaults with every present override applied, validated.
    pub fn spec<T: Scalar>(&self) -> Result<EnvSpec<T>> {
        let mut spec = EnvSpec::<T>::for_mode(self.mode);
        let set = |dst: &mut T, v: Option<f64>| {
            if let Some(v) = v {
                *dst = T::of(v);
            }
        };
        if let Some(n) = self.beam_count {
            spec.beam_count = n;
        }
        if let Some(n) = self.max_episode_steps {
            spec.max_episode_steps = n;
        }
        set(&mut spec.fov_degrees, self.fov_degrees);
        set(&mut spec.lidar_max_range, self.lidar_max_range);
        set(&mut spec.r_arrive, self.r_arrive);
        set(&mut spec.r_collide, self.r_collide);
        set(&mut spec.goal_radius, self.goal_radius);
        set(&mut spec.collision_distance, self.collision_distance);
        set(&mut spec.dt, self.dt);
        if self.action_low.is_some() || self.action_high.is_some() {
            let low = match &self.action_low {
                Some(v) => v.iter().map(|&x| T::of(x)).collect(),
                None => spec.action_box.low().to_vec(),
            };
            let high = match &self.action_high {
                Some(v) => v.iter().map(|&x| T::of(x)).collect(),
                None => spec.action_box.high().to_vec(),
            };
            spec.action_box = ActionBox::new(low, high).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.z_min.is_some() || self.z_max.is_some() {
            let (lo, hi) = spec.z_bounds.unwrap_or((T::zero(), T::zero()));
            spec.z_bounds = Some((
                self.z_min.map(T::of).unwrap_or(lo),
                self.z_max.map(T::of).unwrap_or(hi),
            ));
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// `[run]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub train_episodes: usize,
    pub eval_episodes: usize,
    pub seed: u64,
    pub ma_window: usize,
    /// Write per-episode trajectory files for evaluation runs.
    pub export_trajectories: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            train_episodes: 500,
            eval_episodes: 100,
            seed: 0,
            ma_window: 50,
            export_trajectories: true,
        }
    }
}

/// Full experiment description, loadable from a TOML file with `[env]`,
/// `[td3]` and `[run]` sections. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvSection,
    pub td3: Td3Config,
    pub run: RunSection,
}

impl ExperimentConfig {
    pub fn for_mode(mode: Mode) -> Self {
        Self {
            env: EnvSection::for_mode(mode),
            ..Default::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("ExperimentConfig serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.td3.validate()?;
        self.env.spec::<f64>()?;
        self.env.train_scenario::<f64>()?;
        self.env.eval_scenario::<f64>()?;
        if self.run.train_episodes < 1 || self.run.eval_episodes < 1 {
            return Err(Error::Config("episode counts must be at least 1".into()));
        }
        if self.run.ma_window < 1 {
            return Err(Error::Config("ma_window must be at least 1".into()));
        }
        Ok(())
    }
}
