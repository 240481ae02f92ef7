//! Analytic range sensing inside a square arena with circular obstacles.

use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle<T> {
    pub x: T,
    pub y: T,
    pub radius: T,
}

impl<T: Scalar> Circle<T> {
    pub fn new(x: T, y: T, radius: T) -> Self {
        Self { x, y, radius }
    }

    /// Signed distance from a point to the circle boundary (negative inside).
    pub fn surface_distance(&self, px: T, py: T) -> T {
        (px - self.x).hypot(py - self.y) - self.radius
    }

    pub fn contains(&self, px: T, py: T) -> bool {
        self.surface_distance(px, py) < T::zero()
    }
}

/// Planar pose: position in meters, heading in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2<T> {
    pub x: T,
    pub y: T,
    pub yaw: T,
}

/// Distance along the unit direction `(dx, dy)` from `(ox, oy)` to the first
/// point of `circle`. Zero when the origin is inside the circle.
pub fn ray_circle<T: Scalar>(ox: T, oy: T, dx: T, dy: T, circle: &Circle<T>) -> Option<T> {
    let fx = ox - circle.x;
    let fy = oy - circle.y;
    let c = fx * fx + fy * fy - circle.radius * circle.radius;
    if c <= T::zero() {
        return Some(T::zero());
    }
    // |f + t d|^2 = r^2 with |d| = 1  =>  t^2 + 2 b t + c = 0
    let b = fx * dx + fy * dy;
    if b >= T::zero() {
        return None;
    }
    let disc = b * b - c;
    if disc < T::zero() {
        return None;
    }
    // Near root written as c / (-b + sqrt(disc)) to avoid cancellation.
    Some(c / (-b + disc.sqrt()))
}

/// Distance along `(dx, dy)` from an interior point to the boundary of the
/// square `[-h, h]^2`. Zero when the origin is on or outside the boundary.
pub fn ray_square<T: Scalar>(ox: T, oy: T, dx: T, dy: T, half_extent: T) -> T {
    let h = half_extent;
    if ox.abs() >= h || oy.abs() >= h {
        return T::zero();
    }
    let axis = |o: T, d: T| {
        if d > T::zero() {
            (h - o) / d
        } else if d < T::zero() {
            (-h - o) / d
        } else {
            T::infinity()
        }
    };
    axis(ox, dx).min(axis(oy, dy))
}

/// Range reading for each beam (angles relative to the heading), capped at `max_range`.
pub fn raycast<T: Scalar>(pose: &Pose2<T>, scenario: &Scenario<T>, beam_angles: &[T], max_range: T) -> Vec<T> {
    beam_angles
        .iter()
        .map(|&rel| {
            let theta = pose.yaw + rel;
            let (dy, dx) = theta.sin_cos();
            let wall = ray_square(pose.x, pose.y, dx, dy, scenario.arena_half_extent);
            scenario
                .obstacles
                .iter()
                .filter_map(|c| ray_circle(pose.x, pose.y, dx, dy, c))
                .fold(wall, T::min)
                .min(max_range)
        })
        .collect()
}
