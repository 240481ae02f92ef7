//! Independent reference implementations shared by the integration tests and
//! the acceptance runner. Nothing here calls into the code under test except to
//! read parameters.
#![allow(dead_code)]

use dpu_core::envs::{Circle, Pose2, Scenario};
use dpu_core::nncore::{DenseNet, OutputActivation};
use dpu_core::replay::Batch;
use rand::Rng;

/// Plain-loop forward pass. Returns (hidden pre-activations per layer, output).
pub fn forward_oracle(net: &DenseNet<f64>, x: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let layers = net.layers();
    let mut a = x.to_vec();
    let mut pre = Vec::new();
    for (l, layer) in layers.iter().enumerate() {
        let (fan_in, fan_out) = layer.weight.dim();
        let mut z = vec![0.0; fan_out];
        for j in 0..fan_out {
            let mut acc = layer.bias[j];
            for i in 0..fan_in {
                acc += a[i] * layer.weight[[i, j]];
            }
            z[j] = acc;
        }
        if l + 1 < layers.len() {
            a = z.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect();
            pre.push(z);
        } else {
            let y = match net.output_activation() {
                OutputActivation::Identity => z,
                OutputActivation::Tanh => z.iter().map(|v| v.tanh()).collect(),
                OutputActivation::Squashed { low, high } => z
                    .iter()
                    .enumerate()
                    .map(|(j, v)| low[j] + (v.tanh() + 1.0) * 0.5 * (high[j] - low[j]))
                    .collect(),
            };
            return (pre, y);
        }
    }
    unreachable!()
}

pub fn weighted_output(net: &DenseNet<f64>, x: &[f64], c: &[f64]) -> f64 {
    forward_oracle(net, x).1.iter().zip(c).map(|(y, c)| y * c).sum()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Random net with 0..=3 hidden layers of width <= 16 and a random output activation.
pub fn random_net<R: Rng>(rng: &mut R) -> DenseNet<f64> {
    let depth = rng.random_range(0..=3);
    let mut sizes = vec![rng.random_range(1..=8)];
    for _ in 0..depth {
        sizes.push(rng.random_range(1..=16));
    }
    let out = rng.random_range(1..=4);
    sizes.push(out);
    let act = match rng.random_range(0..3) {
        0 => OutputActivation::Identity,
        1 => OutputActivation::Tanh,
        _ => OutputActivation::Squashed {
            low: (0..out).map(|_| rng.random_range(-2.0..0.0)).collect(),
            high: (0..out).map(|_| rng.random_range(0.0..2.0)).collect(),
        },
    };
    DenseNet::new(&sizes, act, rng).unwrap()
}

/// Input whose hidden pre-activations all stay at least `margin` away from the
/// ReLU kink, so central differences never straddle it.
pub fn kink_free_input<R: Rng>(net: &DenseNet<f64>, rng: &mut R, margin: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..net.input_width()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (pre, _) = forward_oracle(net, &x);
        if pre.iter().flatten().all(|z| z.abs() > margin) {
            return x;
        }
    }
}

/// Max relative error between analytic and central-difference gradients of
/// `sum_j c_j y_j` over every parameter and every input component.
pub fn gradient_check(net: &DenseNet<f64>, x: &[f64], c: &[f64], h: f64) -> f64 {
    let grads = net.backward(x, c).unwrap();
    let mut worst: f64 = 0.0;
    let mut probe = net.clone();
    for l in 0..net.layers().len() {
        let (fi, fo) = net.layers()[l].weight.dim();
        for i in 0..fi {
            for j in 0..fo {
                let w0 = net.layers()[l].weight[[i, j]];
                probe.layers_mut()[l].weight[[i, j]] = w0 + h;
                let up = weighted_output(&probe, x, c);
                probe.layers_mut()[l].weight[[i, j]] = w0 - h;
                let down = weighted_output(&probe, x, c);
                probe.layers_mut()[l].weight[[i, j]] = w0;
                worst = worst.max(rel_err(grads.weights[l][[i, j]], (up - down) / (2.0 * h)));
            }
        }
        for j in 0..fo {
            let b0 = net.layers()[l].bias[j];
            probe.layers_mut()[l].bias[j] = b0 + h;
            let up = weighted_output(&probe, x, c);
            probe.layers_mut()[l].bias[j] = b0 - h;
            let down = weighted_output(&probe, x, c);
            probe.layers_mut()[l].bias[j] = b0;
            worst = worst.max(rel_err(grads.biases[l][j], (up - down) / (2.0 * h)));
        }
    }
    for k in 0..x.len() {
        let mut xp = x.to_vec();
        xp[k] += h;
        let up = weighted_output(net, &xp, c);
        xp[k] -= 2.0 * h;
        let down = weighted_output(net, &xp, c);
        worst = worst.max(rel_err(grads.input[[0, k]], (up - down) / (2.0 * h)));
    }
    worst
}

/// Scalar-loop Polyak blend; returns the expected target parameters.
pub fn soft_update_oracle(target: &DenseNet<f64>, source: &DenseNet<f64>, tau: f64) -> Vec<f64> {
    let flat = |n: &DenseNet<f64>| -> Vec<f64> {
        n.layers()
            .iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()).copied().collect::<Vec<_>>())
            .collect()
    };
    flat(target)
        .into_iter()
        .zip(flat(source))
        .map(|(t, s)| tau * s + (1.0 - tau) * t)
        .collect()
}

pub fn flat_params(n: &DenseNet<f64>) -> Vec<f64> {
    n.layers()
        .iter()
        .flat_map(|l| l.weight.iter().chain(l.bias.iter()).copied().collect::<Vec<_>>())
        .collect()
}

/// Ray marching along the beam with a fixed step; returns the last free
/// distance before the point enters an obstacle or leaves the arena.
pub fn ray_march(pose: &Pose2<f64>, angle: f64, scenario: &Scenario<f64>, max_range: f64, step: f64) -> f64 {
    let (dy, dx) = (pose.yaw + angle).sin_cos();
    let h = scenario.arena_half_extent;
    let blocked = |x: f64, y: f64| {
        x.abs() >= h || y.abs() >= h || scenario.obstacles.iter().any(|c: &Circle<f64>| (x - c.x).hypot(y - c.y) <= c.radius)
    };
    if blocked(pose.x, pose.y) {
        return 0.0;
    }
    let mut t = 0.0;
    while t < max_range {
        let next = t + step;
        if blocked(pose.x + next * dx, pose.y + next * dy) {
            return t;
        }
        t = next;
    }
    max_range
}

/// Mean squared TD error of a linear critic `q(s, a) = w . [s, a] + b`
/// against the given targets, computed with scalar loops.
pub fn linear_critic_mse(weights: &[f64], bias: f64, batch: &Batch<f64>, targets: &[f64]) -> f64 {
    let n = batch.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut q = bias;
        let s = batch.states.row(i);
        let a = batch.actions.row(i);
        for (k, v) in s.iter().chain(a.iter()).enumerate() {
            q += weights[k] * v;
        }
        total += (q - targets[i]).powi(2);
    }
    total / n as f64
}

/// Upper critical value of chi-square with `df` degrees of freedom at significance `alpha`.
pub fn chi_square_critical(df: f64, alpha: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df).unwrap().inverse_cdf(1.0 - alpha)
}
