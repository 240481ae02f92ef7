use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Per-component closed interval `[low, high]` of admissible actions.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionBox<T> {
    low: Vec<T>,
    high: Vec<T>,
}

impl<T: Scalar> ActionBox<T> {
    pub fn new(low: Vec<T>, high: Vec<T>) -> Result<Self> {
        check_len("action box bounds", low.len(), high.len())?;
        if low.is_empty() {
            return Err(Error::InvalidArgument("action box needs at least one component".into()));
        }
        if low.iter().zip(&high).any(|(l, h)| !(l.is_finite() && h.is_finite() && l <= h)) {
            return Err(Error::InvalidArgument(
                "action box bounds must be finite with low <= high".into(),
            ));
        }
        Ok(Self { low, high })
    }

    pub fn width(&self) -> usize {
        self.low.len()
    }

    pub fn low(&self) -> &[T] {
        &self.low
    }

    pub fn high(&self) -> &[T] {
        &self.high
    }

    /// Half of each component's range; noise scales are expressed in these units.
    pub fn half_range(&self, i: usize) -> T {
        (self.high[i] - self.low[i]) * T::of(0.5)
    }

    pub fn contains(&self, action: &[T]) -> bool {
        action.len() == self.width()
            && action
                .iter()
                .zip(self.low.iter().zip(&self.high))
                .all(|(a, (l, h))| a >= l && a <= h)
    }

    /// Clamp in place. NaN components are mapped to the lower bound.
    pub fn clamp(&self, action: &mut [T]) {
        for (a, (&l, &h)) in action.iter_mut().zip(self.low.iter().zip(&self.high)) {
            *a = if a.is_nan() { l } else { a.max(l).min(h) };
        }
    }

    /// Uniform sample over the box. Degenerate components return their single value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        self.low
            .iter()
            .zip(&self.high)
            .map(|(&l, &h)| {
                if l == h {
                    l
                } else {
                    T::of(rng.random_range(l.as_f64()..=h.as_f64()))
                }
            })
            .collect()
    }
}
