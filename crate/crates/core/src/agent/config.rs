use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Learning hyperparameters of the TD3 agent.
///
/// Noise scales (`policy_noise_std`, `noise_clip`, `ou_sigma`, `ou_mu`) are in
/// normalized action units: they are multiplied by each component's half range
/// before being added to an action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Td3Config {
    pub gamma: f64,
    pub tau: f64,
    /// Delayed policy update interval: actor and targets move once per `eta` critic updates.
    pub eta: u64,
    pub policy_noise_std: f64,
    pub noise_clip: f64,
    pub batch_size: usize,
    /// Environment steps driven by the uniform action sampler before learning starts.
    pub start_steps: u64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub ou_theta: f64,
    pub ou_sigma: f64,
    pub ou_mu: f64,
    pub ou_dt: f64,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub buffer_capacity: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
}

impl Default for Td3Config {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.02,
            eta: 2,
            policy_noise_std: 0.2,
            noise_clip: 0.5,
            batch_size: 100,
            start_steps: 1000,
            actor_lr: 1e-3,
            critic_lr: 1e-3,
            ou_theta: 0.15,
            ou_sigma: 0.2,
            ou_mu: 0.0,
            ou_dt: 1.0,
            actor_hidden: vec![64, 64],
            critic_hidden: vec![64, 64],
            buffer_capacity: 200_000,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
        }
    }
}

impl Td3Config {
    pub fn with_eta(mut self, eta: u64) -> Self {
        self.eta = eta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        if self.eta < 1 {
            return bad("eta must be at least 1".into());
        }
        if !(self.policy_noise_std >= 0.0 && self.policy_noise_std.is_finite()) {
            return bad(format!("policy_noise_std must be >= 0, got {}", self.policy_noise_std));
        }
        if !(self.noise_clip > 0.0 && self.noise_clip.is_finite()) {
            return bad(format!("noise_clip must be > 0, got {}", self.noise_clip));
        }
        if self.batch_size < 1 {
            return bad("batch_size must be at least 1".into());
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return bad("learning rates must be positive".into());
        }
        if !(self.ou_theta >= 0.0 && self.ou_sigma >= 0.0 && self.ou_dt > 0.0 && self.ou_mu.is_finite()) {
            return bad("OU parameters need theta >= 0, sigma >= 0, dt > 0".into());
        }
        if self.actor_hidden.contains(&0) || self.critic_hidden.contains(&0) {
            return bad("hidden layer widths must be positive".into());
        }
        if self.buffer_capacity < 1 {
            return bad("buffer_capacity must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.adam_beta1)
            || !(0.0..1.0).contains(&self.adam_beta2)
            || !(self.adam_epsilon > 0.0)
        {
            return bad("Adam constants need beta in [0, 1) and epsilon > 0".into());
        }
        Ok(())
    }
}
