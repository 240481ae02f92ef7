//! Kinematic aerial and terrestrial mapless-navigation simulators.

mod env;
mod geometry;
mod scenario;
mod spec;

pub use env::{EnvState, NavEnv, StepResult};
pub use geometry::{ray_circle, ray_square, raycast, Circle, Pose2};
pub use scenario::{
    builtin_scenario, builtin_scenarios, resolve_scenario, Scenario, ScenarioFile, AERIAL_EVAL,
    AERIAL_TRAIN, TERRESTRIAL_EVAL, TERRESTRIAL_TRAIN,
};
pub use spec::{reward_fn, EnvSpec, Mode, Outcome};
