use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::ActionBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Aerial,
    Terrestrial,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Aerial => "aerial",
            Mode::Terrestrial => "terrestrial",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aerial" => Ok(Mode::Aerial),
            "terrestrial" => Ok(Mode::Terrestrial),
            other => Err(Error::Config(format!("unknown env mode `{other}`"))),
        }
    }
}

/// How an episode step ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Running,
    Arrive,
    Collide,
    Timeout,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Running => "running",
            Outcome::Arrive => "arrive",
            Outcome::Collide => "collide",
            Outcome::Timeout => "timeout",
        }
    }

    pub fn is_terminal(self) -> bool {
        self != Outcome::Running
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "running" => Ok(Outcome::Running),
            "arrive" => Ok(Outcome::Arrive),
            "collide" => Ok(Outcome::Collide),
            "timeout" => Ok(Outcome::Timeout),
            other => Err(Error::InvalidArgument(format!("unknown outcome `{other}`"))),
        }
    }
}

/// Sensor layout, action scales, reward constants and episode limits of one task.
///
/// Aerial actions are `[forward speed m/s, vertical speed m/s, yaw change rad]`;
/// terrestrial actions are `[linear speed m/s, angular speed rad/s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec<T> {
    pub mode: Mode,
    pub beam_count: usize,
    pub fov_degrees: T,
    pub lidar_max_range: T,
    pub action_box: ActionBox<T>,
    pub r_arrive: T,
    pub r_collide: T,
    /// Goal capture radius `c_d`.
    pub goal_radius: T,
    /// Collision threshold `c_o` on the minimum raw range.
    pub collision_distance: T,
    pub max_episode_steps: u32,
    pub dt: T,
    /// Altitude limits (aerial only); the vehicle is clamped, not crashed, at these.
    pub z_bounds: Option<(T, T)>,
}

impl<T: Scalar> EnvSpec<T> {
    pub fn aerial() -> Self {
        let q = T::of(0.25);
        Self {
            mode: Mode::Aerial,
            beam_count: 20,
            fov_degrees: T::of(270.0),
            lidar_max_range: T::of(5.0),
            action_box: ActionBox::new(vec![T::zero(), -q, -q], vec![q, q, q]).unwrap(),
            r_arrive: T::of(200.0),
            r_collide: T::of(-20.0),
            goal_radius: T::of(0.5),
            collision_distance: T::of(0.5),
            max_episode_steps: 500,
            dt: T::of(0.1),
            z_bounds: Some((T::of(0.5), T::of(2.5))),
        }
    }

    pub fn terrestrial() -> Self {
        let q = T::of(0.25);
        Self {
            mode: Mode::Terrestrial,
            beam_count: 10,
            fov_degrees: T::of(180.0),
            lidar_max_range: T::of(3.5),
            action_box: ActionBox::new(vec![T::zero(), -q], vec![q, q]).unwrap(),
            r_arrive: T::of(100.0),
            r_collide: T::of(-10.0),
            goal_radius: T::of(0.3),
            collision_distance: T::of(0.19),
            max_episode_steps: 250,
            dt: T::of(0.1),
            z_bounds: None,
        }
    }

    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Aerial => Self::aerial(),
            Mode::Terrestrial => Self::terrestrial(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("{} env spec: {m}", self.mode)));
        if self.beam_count < 1 {
            return bad("beam_count must be at least 1");
        }
        if !(self.fov_degrees > T::zero() && self.fov_degrees <= T::of(360.0)) {
            return bad("fov_degrees must lie in (0, 360]");
        }
        if !(self.lidar_max_range > T::zero()) {
            return bad("lidar_max_range must be positive");
        }
        if !(self.collision_distance >= T::zero() && self.collision_distance <= self.goal_radius) {
            return bad("need 0 <= collision_distance <= goal_radius");
        }
        if !(self.goal_radius > T::zero()) {
            return bad("goal_radius must be positive");
        }
        if self.max_episode_steps < 1 {
            return bad("max_episode_steps must be at least 1");
        }
        if !(self.dt > T::zero()) {
            return bad("dt must be positive");
        }
        if !(self.r_arrive.is_finite() && self.r_collide.is_finite()) {
            return bad("rewards must be finite");
        }
        let expected_actions = match self.mode {
            Mode::Aerial => 3,
            Mode::Terrestrial => 2,
        };
        if self.action_box.width() != expected_actions {
            return bad("action box width does not match the mode");
        }
        match (self.mode, self.z_bounds) {
            (Mode::Aerial, Some((lo, hi))) if lo < hi => {}
            (Mode::Aerial, _) => return bad("aerial mode needs z_bounds with low < high"),
            (Mode::Terrestrial, Some(_)) => return bad("z_bounds apply to aerial mode only"),
            (Mode::Terrestrial, None) => {}
        }
        Ok(())
    }

    /// Bin-center beam angles in radians relative to the heading, tiling the field of view.
    pub fn beam_angles(&self) -> Vec<T> {
        let fov = self.fov_degrees.to_radians();
        let n = T::from_usize(self.beam_count).unwrap();
        let step = fov / n;
        let start = -fov * T::of(0.5);
        (0..self.beam_count)
            .map(|k| start + (T::from_usize(k).unwrap() + T::of(0.5)) * step)
            .collect()
    }

    pub fn observation_width(&self) -> usize {
        match self.mode {
            Mode::Aerial => self.beam_count + 3 + 3,
            Mode::Terrestrial => self.beam_count + 4,
        }
    }

    pub fn action_width(&self) -> usize {
        self.action_box.width()
    }
}

/// Binary sparse reward. Arrival is checked first, then collision, then the step limit.
pub fn reward_fn<T: Scalar>(goal_distance: T, min_range: T, ep: u32, spec: &EnvSpec<T>) -> (T, bool, Outcome) {
    if goal_distance < spec.goal_radius {
        (spec.r_arrive, true, Outcome::Arrive)
    } else if min_range < spec.collision_distance {
        (spec.r_collide, true, Outcome::Collide)
    } else if ep >= spec.max_episode_steps {
        (spec.r_collide, true, Outcome::Timeout)
    } else {
        (T::zero(), false, Outcome::Running)
    }
}
