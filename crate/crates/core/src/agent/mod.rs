//! The TD3 learner with a configurable delayed-policy-update interval.

mod checkpoint;
mod config;
mod noise;
mod td3;

use rand::Rng;

pub use checkpoint::AGENT_CHECKPOINT_TAG;
pub use config::Td3Config;
pub use noise::{clipped_gaussian, OuNoise};
pub use td3::{LossReport, Td3Agent};

use crate::scalar::Scalar;
use crate::space::ActionBox;

/// Warm-up exploration: a uniform draw from the action box.
pub fn random_warmup_action<T: Scalar, R: Rng + ?Sized>(action_box: &ActionBox<T>, rng: &mut R) -> Vec<T> {
    action_box.sample(rng)
}
