use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use super::config::Td3Config;
use super::noise::{clipped_gaussian, OuNoise};
use crate::error::{check_len, Error, Result};
use crate::nncore::{hstack, AdamConfig, DenseNet, OutputActivation};
use crate::replay::{Batch, ReplayBuffer};
use crate::scalar::Scalar;
use crate::space::ActionBox;

/// Losses from one call to [`Td3Agent::train_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossReport<T> {
    pub critic1: T,
    pub critic2: T,
    /// Present only on steps where the delayed actor update ran.
    pub actor: Option<T>,
}

/// Actor, twin critics and their three target copies.
#[derive(Debug, Clone)]
pub struct Td3Agent<T> {
    pub(super) config: Td3Config,
    pub(super) action_box: ActionBox<T>,
    pub(super) state_width: usize,
    pub(super) actor: DenseNet<T>,
    pub(super) actor_target: DenseNet<T>,
    pub(super) critic1: DenseNet<T>,
    pub(super) critic2: DenseNet<T>,
    pub(super) critic1_target: DenseNet<T>,
    pub(super) critic2_target: DenseNet<T>,
    pub(super) ou: OuNoise<T>,
    pub(super) critic_updates: u64,
    pub(super) actor_updates: u64,
}

impl<T: Scalar> Td3Agent<T> {
    /// Fresh agent with randomly initialized networks; targets start as exact copies.
    pub fn new<R: Rng + ?Sized>(
        state_width: usize,
        action_box: ActionBox<T>,
        config: Td3Config,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        if state_width == 0 {
            return Err(Error::InvalidArgument("state width must be positive".into()));
        }
        let action_width = action_box.width();
        let sizes = |input: usize, hidden: &[usize], output: usize| {
            let mut v = vec![input];
            v.extend_from_slice(hidden);
            v.push(output);
            v
        };
        let squash = OutputActivation::Squashed {
            low: action_box.low().to_vec(),
            high: action_box.high().to_vec(),
        };
        let actor = DenseNet::new(&sizes(state_width, &config.actor_hidden, action_width), squash, rng)?;
        let critic_sizes = sizes(state_width + action_width, &config.critic_hidden, 1);
        let critic1 = DenseNet::new(&critic_sizes, OutputActivation::Identity, rng)?;
        let critic2 = DenseNet::new(&critic_sizes, OutputActivation::Identity, rng)?;
        Self::from_networks(config, action_box, actor, critic1, critic2)
    }

    /// Build an agent around caller-supplied networks (e.g. stub critics in tests).
    pub fn from_networks(
        config: Td3Config,
        action_box: ActionBox<T>,
        actor: DenseNet<T>,
        critic1: DenseNet<T>,
        critic2: DenseNet<T>,
    ) -> Result<Self> {
        config.validate()?;
        let state_width = actor.input_width();
        let action_width = action_box.width();
        check_len("actor output width", action_width, actor.output_width())?;
        for critic in [&critic1, &critic2] {
            check_len("critic input width", state_width + action_width, critic.input_width())?;
            check_len("critic output width", 1, critic.output_width())?;
        }
        let adam = AdamConfig {
            beta1: T::of(config.adam_beta1),
            beta2: T::of(config.adam_beta2),
            epsilon: T::of(config.adam_epsilon),
        };
        let actor = actor.with_adam_config(adam.clone());
        let critic1 = critic1.with_adam_config(adam.clone());
        let critic2 = critic2.with_adam_config(adam);
        let ou = OuNoise::new(
            action_width,
            T::of(config.ou_theta),
            T::of(config.ou_sigma),
            T::of(config.ou_mu),
            T::of(config.ou_dt),
        );
        Ok(Self {
            actor_target: actor.clone_into_target(),
            critic1_target: critic1.clone_into_target(),
            critic2_target: critic2.clone_into_target(),
            actor,
            critic1,
            critic2,
            config,
            action_box,
            state_width,
            ou,
            critic_updates: 0,
            actor_updates: 0,
        })
    }

    pub fn config(&self) -> &Td3Config {
        &self.config
    }

    pub fn action_box(&self) -> &ActionBox<T> {
        &self.action_box
    }

    pub fn state_width(&self) -> usize {
        self.state_width
    }

    pub fn action_width(&self) -> usize {
        self.action_box.width()
    }

    pub fn critic_updates(&self) -> u64 {
        self.critic_updates
    }

    pub fn actor_updates(&self) -> u64 {
        self.actor_updates
    }

    pub fn actor(&self) -> &DenseNet<T> {
        &self.actor
    }

    pub fn actor_target(&self) -> &DenseNet<T> {
        &self.actor_target
    }

    pub fn critics(&self) -> (&DenseNet<T>, &DenseNet<T>) {
        (&self.critic1, &self.critic2)
    }

    pub fn critic_targets(&self) -> (&DenseNet<T>, &DenseNet<T>) {
        (&self.critic1_target, &self.critic2_target)
    }

    pub fn ou_noise(&self) -> &OuNoise<T> {
        &self.ou
    }

    pub fn ou_noise_mut(&mut self) -> &mut OuNoise<T> {
        &mut self.ou
    }

    /// Start a new exploration episode.
    pub fn reset_noise(&mut self) {
        self.ou.reset();
    }

    /// Policy action for `state`. With `explore`, one OU step (scaled by each
    /// component's half range) is added and the result is clamped to the box.
    pub fn select_action<R: Rng + ?Sized>(
        &mut self,
        state: &[T],
        explore: bool,
        rng: &mut R,
    ) -> Result<Vec<T>> {
        check_len("state width", self.state_width, state.len())?;
        let mut action = self.actor.forward(state)?;
        if explore {
            let noise = self.ou.step(rng);
            for (i, (a, &n)) in action.iter_mut().zip(noise).enumerate() {
                *a += n * self.action_box.half_range(i);
            }
        }
        self.action_box.clamp(&mut action);
        Ok(action)
    }

    /// Greedy action; never touches the noise process.
    pub fn act(&self, state: &[T]) -> Result<Vec<T>> {
        check_len("state width", self.state_width, state.len())?;
        let mut action = self.actor.forward(state)?;
        self.action_box.clamp(&mut action);
        Ok(action)
    }

    /// Smoothed target action `clamp(pi'(s') + clip(N(0, std), -c, c))` for each row.
    pub fn target_actions<R: Rng + ?Sized>(
        &self,
        next_states: ArrayView2<T>,
        rng: &mut R,
    ) -> Result<Array2<T>> {
        let mut actions = self.actor_target.forward_batch(next_states)?;
        let std = T::of(self.config.policy_noise_std);
        let clip = T::of(self.config.noise_clip);
        for mut row in actions.rows_mut() {
            for (i, a) in row.iter_mut().enumerate() {
                *a += clipped_gaussian(std, clip, rng) * self.action_box.half_range(i);
            }
            self.action_box
                .clamp(row.as_slice_mut().expect("owned rows are contiguous"));
        }
        Ok(actions)
    }

    /// Clipped double-Q bootstrap targets `r + gamma (1 - done) min(Q1', Q2')`.
    pub fn compute_targets<R: Rng + ?Sized>(&self, batch: &Batch<T>, rng: &mut R) -> Result<Array1<T>> {
        check_len("batch state width", self.state_width, batch.next_states.ncols())?;
        let next_actions = self.target_actions(batch.next_states.view(), rng)?;
        let input = self.critic_input(batch.next_states.view(), next_actions.view())?;
        let q1 = self.critic1_target.forward_batch(input.view())?;
        let q2 = self.critic2_target.forward_batch(input.view())?;
        let gamma = T::of(self.config.gamma);
        let targets = (0..batch.len())
            .map(|i| {
                let q_min = q1[[i, 0]].min(q2[[i, 0]]);
                batch.rewards[i] + gamma * (T::one() - batch.dones[i]) * q_min
            })
            .collect();
        Ok(targets)
    }

    /// One learning iteration: both critics descend on the TD error; every
    /// `eta`-th call the actor ascends `Q1` and all targets are soft-updated.
    pub fn train_step<R: Rng + ?Sized>(
        &mut self,
        buffer: &ReplayBuffer<T>,
        rng: &mut R,
    ) -> Result<LossReport<T>> {
        let batch = buffer.sample_batch(self.config.batch_size, rng)?;
        self.train_on_batch(&batch, rng)
    }

    /// [`Self::train_step`] on an explicit batch.
    pub fn train_on_batch<R: Rng + ?Sized>(&mut self, batch: &Batch<T>, rng: &mut R) -> Result<LossReport<T>> {
        if batch.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        check_len("batch state width", self.state_width, batch.states.ncols())?;
        check_len("batch action width", self.action_width(), batch.actions.ncols())?;
        let targets = self.compute_targets(batch, rng)?;
        let input = self.critic_input(batch.states.view(), batch.actions.view())?;
        let critic_lr = T::of(self.config.critic_lr);
        let critic1 = critic_descent(&mut self.critic1, input.view(), &targets, critic_lr)?;
        let critic2 = critic_descent(&mut self.critic2, input.view(), &targets, critic_lr)?;
        self.critic_updates += 1;

        let actor = if self.critic_updates % self.config.eta == 0 {
            let loss = self.actor_ascent(batch.states.view())?;
            let tau = T::of(self.config.tau);
            self.actor_target.soft_update(&self.actor, tau)?;
            self.critic1_target.soft_update(&self.critic1, tau)?;
            self.critic2_target.soft_update(&self.critic2, tau)?;
            self.actor_updates += 1;
            Some(loss)
        } else {
            None
        };
        Ok(LossReport {
            critic1,
            critic2,
            actor,
        })
    }

    /// Critic input rows `[state, action]`.
    pub fn critic_input(&self, states: ArrayView2<T>, actions: ArrayView2<T>) -> Result<Array2<T>> {
        hstack(states, actions)
    }

    /// Deterministic policy gradient step on `-mean Q1(s, pi(s))`; returns that loss.
    fn actor_ascent(&mut self, states: ArrayView2<T>) -> Result<T> {
        let n = T::from_usize(states.nrows()).unwrap();
        let actor_trace = self.actor.forward_trace(states)?;
        let input = self.critic_input(states, actor_trace.output.view())?;
        let q_trace = self.critic1.forward_trace(input.view())?;
        let loss = -q_trace.output.sum() / n;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("actor loss after {} critic updates", self.critic_updates)));
        }
        let dq = Array2::from_elem((states.nrows(), 1), -T::one() / n);
        let critic_grads = self.critic1.backward_trace(&q_trace, dq.view())?;
        let da = critic_grads.input.slice(s![.., self.state_width..]).to_owned();
        let actor_grads = self.actor.backward_trace(&actor_trace, da.view())?;
        self.actor.adam_step(&actor_grads, T::of(self.config.actor_lr))?;
        Ok(loss)
    }
}

/// Mean-squared-error step of one critic toward fixed targets; returns the loss.
fn critic_descent<T: Scalar>(
    critic: &mut DenseNet<T>,
    input: ArrayView2<T>,
    targets: &Array1<T>,
    lr: T,
) -> Result<T> {
    let n = T::from_usize(targets.len()).unwrap();
    let trace = critic.forward_trace(input)?;
    let q = trace.output.index_axis(Axis(1), 0);
    let err = &q - targets;
    let loss = err.mapv(|e| e * e).sum() / n;
    if !loss.is_finite() {
        return Err(Error::NonFinite("critic loss".into()));
    }
    let grad = err.mapv(|e| (e + e) / n).insert_axis(Axis(1));
    let grads = critic.backward_trace(&trace, grad.view())?;
    critic.adam_step(&grads, lr)?;
    Ok(loss)
}
