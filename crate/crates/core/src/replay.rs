//! Fixed-capacity FIFO experience replay with uniform sampling.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// One `(s, a, r, s', done)` tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition<T> {
    pub state: Vec<T>,
    pub action: Vec<T>,
    pub reward: T,
    pub next_state: Vec<T>,
    pub done: bool,
}

/// A sampled mini-batch packed row-wise for the network passes.
#[derive(Debug, Clone)]
pub struct Batch<T> {
    pub states: Array2<T>,
    pub actions: Array2<T>,
    pub rewards: Array1<T>,
    pub next_states: Array2<T>,
    /// 1 for terminal transitions, 0 otherwise.
    pub dones: Array1<T>,
}

impl<T: Scalar> Batch<T> {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn from_transitions(items: &[&Transition<T>]) -> Result<Self> {
        let first = items.first().ok_or(Error::EmptyBuffer)?;
        let (n, sd, ad) = (items.len(), first.state.len(), first.action.len());
        let mut batch = Batch {
            states: Array2::zeros((n, sd)),
            actions: Array2::zeros((n, ad)),
            rewards: Array1::zeros(n),
            next_states: Array2::zeros((n, sd)),
            dones: Array1::zeros(n),
        };
        for (i, t) in items.iter().enumerate() {
            check_len("batch state width", sd, t.state.len())?;
            check_len("batch next-state width", sd, t.next_state.len())?;
            check_len("batch action width", ad, t.action.len())?;
            batch.states.row_mut(i).assign(&ndarray::aview1(&t.state));
            batch.actions.row_mut(i).assign(&ndarray::aview1(&t.action));
            batch.next_states.row_mut(i).assign(&ndarray::aview1(&t.next_state));
            batch.rewards[i] = t.reward;
            batch.dones[i] = if t.done { T::one() } else { T::zero() };
        }
        Ok(batch)
    }
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    state_width: usize,
    action_width: usize,
    items: Vec<Transition<T>>,
    cursor: usize,
}

impl<T: Scalar> ReplayBuffer<T> {
    pub fn new(capacity: usize, state_width: usize, action_width: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidArgument("replay capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            state_width,
            action_width,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            cursor: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Store a transition, overwriting the oldest one when full.
    pub fn push(&mut self, t: Transition<T>) -> Result<()> {
        check_len("transition state width", self.state_width, t.state.len())?;
        check_len("transition next-state width", self.state_width, t.next_state.len())?;
        check_len("transition action width", self.action_width, t.action.len())?;
        if !t.reward.is_finite() {
            return Err(Error::NonFinite("transition reward".into()));
        }
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    /// Stored transitions from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition<T>> {
        let split = if self.items.len() < self.capacity { 0 } else { self.cursor };
        self.items[split..].iter().chain(self.items[..split].iter())
    }

    pub fn get(&self, index: usize) -> Option<&Transition<T>> {
        self.items.get(index)
    }

    /// `n` storage indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.items.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        let len = self.items.len();
        Ok((0..n).map(|_| rng.random_range(0..len)).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Transition<T>>> {
        Ok(self
            .sample_indices(n, rng)?
            .into_iter()
            .map(|i| self.items[i].clone())
            .collect())
    }

    pub fn sample_batch<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Batch<T>> {
        if n == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        let picked: Vec<&Transition<T>> = self
            .sample_indices(n, rng)?
            .into_iter()
            .map(|i| &self.items[i])
            .collect();
        Batch::from_transitions(&picked)
    }
}
