use rand::Rng;

use super::geometry::{raycast, Pose2};
use super::scenario::Scenario;
use super::spec::{reward_fn, EnvSpec, Mode, Outcome};
use crate::error::{check_len, Error, Result};
use crate::scalar::{wrap_angle, Scalar};

/// Extra margin beyond the collision threshold required around start and goal.
const SPAWN_MARGIN: f64 = 0.2;
const MAX_SPAWN_ATTEMPTS: usize = 10_000;

/// Full simulator state of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState<T> {
    pub x: T,
    pub y: T,
    /// Altitude (aerial); zero for terrestrial.
    pub z: T,
    pub yaw: T,
    pub linear_velocity: T,
    pub angular_velocity: T,
    pub prev_action: Vec<T>,
    pub goal: [T; 3],
    pub ep: u32,
    pub done: bool,
    pub outcome: Outcome,
    pub scan: Vec<T>,
}

impl<T: Scalar> EnvState<T> {
    pub fn pose(&self) -> Pose2<T> {
        Pose2 {
            x: self.x,
            y: self.y,
            yaw: self.yaw,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult<T> {
    pub observation: Vec<T>,
    pub reward: T,
    pub done: bool,
    pub outcome: Outcome,
}

/// Kinematic mapless-navigation simulator.
#[derive(Debug, Clone)]
pub struct NavEnv<T> {
    spec: EnvSpec<T>,
    scenario: Scenario<T>,
    beam_angles: Vec<T>,
    state: EnvState<T>,
}

impl<T: Scalar> NavEnv<T> {
    pub fn new(spec: EnvSpec<T>, scenario: Scenario<T>) -> Result<Self> {
        spec.validate()?;
        scenario.validate()?;
        let beam_angles = spec.beam_angles();
        let state = EnvState {
            x: T::zero(),
            y: T::zero(),
            z: T::zero(),
            yaw: T::zero(),
            linear_velocity: T::zero(),
            angular_velocity: T::zero(),
            prev_action: vec![T::zero(); spec.action_width()],
            goal: [T::zero(); 3],
            ep: 0,
            // Must be reset before stepping.
            done: true,
            outcome: Outcome::Running,
            scan: vec![spec.lidar_max_range; spec.beam_count],
        };
        Ok(Self {
            spec,
            scenario,
            beam_angles,
            state,
        })
    }

    pub fn spec(&self) -> &EnvSpec<T> {
        &self.spec
    }

    pub fn scenario(&self) -> &Scenario<T> {
        &self.scenario
    }

    pub fn state(&self) -> &EnvState<T> {
        &self.state
    }

    pub fn beam_angles(&self) -> &[T] {
        &self.beam_angles
    }

    /// Minimum free distance required around spawn points.
    pub fn spawn_clearance(&self) -> T {
        self.spec.collision_distance + T::of(SPAWN_MARGIN)
    }

    /// Place the robot and the goal at fresh free-space positions and return the
    /// first observation.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<T>> {
        let clearance = self.spawn_clearance();
        let min_separation = self.scenario.arena_half_extent * T::of(0.5);
        let (sx, sy) = self.sample_free(clearance, None, rng)?;
        let (gx, gy) = self.sample_free(clearance, Some((sx, sy, min_separation)), rng)?;
        let yaw = wrap_angle(T::of(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)));
        let (z, gz) = match self.spec.z_bounds {
            Some((lo, hi)) => {
                let (lo, hi) = (lo.as_f64(), hi.as_f64());
                (T::of(rng.random_range(lo..=hi)), T::of(rng.random_range(lo..=hi)))
            }
            None => (T::zero(), T::zero()),
        };
        self.state = EnvState {
            x: sx,
            y: sy,
            z,
            yaw,
            linear_velocity: T::zero(),
            angular_velocity: T::zero(),
            prev_action: vec![T::zero(); self.spec.action_width()],
            goal: [gx, gy, gz],
            ep: 0,
            done: false,
            outcome: Outcome::Running,
            scan: Vec::new(),
        };
        self.rescan();
        Ok(self.observation())
    }

    /// Place robot and goal explicitly (pose yaw in radians).
    pub fn reset_to(&mut self, pose: Pose2<T>, z: T, goal: [T; 3]) -> Result<Vec<T>> {
        let h = self.scenario.arena_half_extent;
        if pose.x.abs() > h || pose.y.abs() > h || goal[0].abs() > h || goal[1].abs() > h {
            return Err(Error::InvalidArgument("pose and goal must lie inside the arena".into()));
        }
        self.state = EnvState {
            x: pose.x,
            y: pose.y,
            z,
            yaw: wrap_angle(pose.yaw),
            linear_velocity: T::zero(),
            angular_velocity: T::zero(),
            prev_action: vec![T::zero(); self.spec.action_width()],
            goal,
            ep: 0,
            done: false,
            outcome: Outcome::Running,
            scan: Vec::new(),
        };
        self.rescan();
        Ok(self.observation())
    }

    fn sample_free<R: Rng + ?Sized>(
        &self,
        clearance: T,
        away_from: Option<(T, T, T)>,
        rng: &mut R,
    ) -> Result<(T, T)> {
        let h = self.scenario.arena_half_extent.as_f64();
        let c = clearance.as_f64();
        if c >= h {
            return Err(Error::Config(format!(
                "scenario `{}` too small for spawn clearance {c}",
                self.scenario.name
            )));
        }
        for _ in 0..MAX_SPAWN_ATTEMPTS {
            let x = T::of(rng.random_range(-h + c..h - c));
            let y = T::of(rng.random_range(-h + c..h - c));
            if self.scenario.clearance(x, y) < clearance {
                continue;
            }
            if let Some((ox, oy, d)) = away_from {
                if (x - ox).hypot(y - oy) < d {
                    continue;
                }
            }
            return Ok((x, y));
        }
        Err(Error::Config(format!(
            "could not place a start/goal in scenario `{}` after {MAX_SPAWN_ATTEMPTS} attempts",
            self.scenario.name
        )))
    }

    fn rescan(&mut self) {
        self.state.scan = raycast(
            &self.state.pose(),
            &self.scenario,
            &self.beam_angles,
            self.spec.lidar_max_range,
        );
    }

    /// Planar (terrestrial) or 3D (aerial) distance to the goal.
    pub fn goal_distance(&self) -> T {
        let s = &self.state;
        let planar = (s.goal[0] - s.x).hypot(s.goal[1] - s.y);
        match self.spec.mode {
            Mode::Aerial => planar.hypot(s.goal[2] - s.z),
            Mode::Terrestrial => planar,
        }
    }

    /// Goal bearing relative to the heading, in `(-pi, pi]`.
    pub fn goal_angle(&self) -> T {
        let s = &self.state;
        wrap_angle((s.goal[1] - s.y).atan2(s.goal[0] - s.x) - s.yaw)
    }

    pub fn min_range(&self) -> T {
        self.state.scan.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn observation(&self) -> Vec<T> {
        let s = &self.state;
        let mut obs = Vec::with_capacity(self.spec.observation_width());
        obs.extend(s.scan.iter().map(|&r| r / self.spec.lidar_max_range));
        let diag = self.scenario.diagonal();
        let planar = (s.goal[0] - s.x).hypot(s.goal[1] - s.y);
        match self.spec.mode {
            Mode::Aerial => {
                obs.extend_from_slice(&s.prev_action);
                obs.push(planar / diag);
                obs.push(self.goal_angle());
                obs.push(s.goal[2] - s.z);
            }
            Mode::Terrestrial => {
                obs.push(planar / diag);
                obs.push(self.goal_angle());
                obs.push(s.linear_velocity);
                obs.push(s.angular_velocity);
            }
        }
        obs
    }

    /// Integrate one action, rescan, and score the result.
    pub fn step(&mut self, action: &[T]) -> Result<StepResult<T>> {
        if self.state.done {
            return Err(Error::EpisodeDone);
        }
        check_len("action width", self.spec.action_width(), action.len())?;
        let mut a = action.to_vec();
        self.spec.action_box.clamp(&mut a);
        let dt = self.spec.dt;
        let h = self.scenario.arena_half_extent;
        let s = &mut self.state;
        match self.spec.mode {
            Mode::Terrestrial => {
                let (v, w) = (a[0], a[1]);
                s.yaw = wrap_angle(s.yaw + w * dt);
                s.x += v * s.yaw.cos() * dt;
                s.y += v * s.yaw.sin() * dt;
                s.linear_velocity = v;
                s.angular_velocity = w;
            }
            Mode::Aerial => {
                let (v, vz, dyaw) = (a[0], a[1], a[2]);
                s.yaw = wrap_angle(s.yaw + dyaw);
                s.x += v * s.yaw.cos() * dt;
                s.y += v * s.yaw.sin() * dt;
                let (lo, hi) = self.spec.z_bounds.expect("validated aerial spec");
                s.z = (s.z + vz * dt).max(lo).min(hi);
                s.linear_velocity = v;
                s.angular_velocity = dyaw / dt;
            }
        }
        s.x = s.x.max(-h).min(h);
        s.y = s.y.max(-h).min(h);
        s.prev_action = a;
        s.ep += 1;
        self.rescan();

        let (reward, done, outcome) = reward_fn(self.goal_distance(), self.min_range(), self.state.ep, &self.spec);
        self.state.done = done;
        self.state.outcome = outcome;
        Ok(StepResult {
            observation: self.observation(),
            reward,
            done,
            outcome,
        })
    }
}
