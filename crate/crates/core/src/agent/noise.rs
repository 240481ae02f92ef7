use rand::Rng;
use rand_distr::StandardNormal;

use crate::scalar::Scalar;

/// Discretized Ornstein-Uhlenbeck process:
/// `x <- x + theta (mu - x) dt + sigma sqrt(dt) N(0, I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuNoise<T> {
    pub state: Vec<T>,
    pub theta: T,
    pub sigma: T,
    pub mu: T,
    pub dt: T,
}

impl<T: Scalar> OuNoise<T> {
    pub fn new(width: usize, theta: T, sigma: T, mu: T, dt: T) -> Self {
        Self {
            state: vec![mu; width],
            theta,
            sigma,
            mu,
            dt,
        }
    }

    pub fn reset(&mut self) {
        self.state.iter_mut().for_each(|x| *x = self.mu);
    }

    /// Advance one step and return the new state.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &[T] {
        let diffusion = self.sigma * self.dt.sqrt();
        for x in self.state.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *x += self.theta * (self.mu - *x) * self.dt + diffusion * T::of(z);
        }
        &self.state
    }
}

/// One target-smoothing noise draw: `clip(N(0, std), -clip, clip)`.
pub fn clipped_gaussian<T: Scalar, R: Rng + ?Sized>(std: T, clip: T, rng: &mut R) -> T {
    let z: f64 = rng.sample(StandardNormal);
    (std * T::of(z)).max(-clip).min(clip)
}
