mod common;

use common::linear_critic_mse;
use dpu_core::agent::{clipped_gaussian, random_warmup_action, OuNoise, Td3Agent, Td3Config};
use dpu_core::nncore::{DenseNet, Layer, OutputActivation};
use dpu_core::replay::{Batch, ReplayBuffer, Transition};
use dpu_core::space::ActionBox;
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn terrestrial_box() -> ActionBox<f64> {
    ActionBox::new(vec![0.0, -0.25], vec![0.25, 0.25]).unwrap()
}

fn tiny_config(eta: u64) -> Td3Config {
    Td3Config {
        eta,
        batch_size: 8,
        actor_hidden: vec![8],
        critic_hidden: vec![8],
        ..Td3Config::default()
    }
}

fn filled_buffer(rng: &mut ChaCha8Rng) -> ReplayBuffer<f64> {
    let mut buf = ReplayBuffer::new(256, 3, 2).unwrap();
    for _ in 0..64 {
        buf.push(Transition {
            state: (0..3).map(|_| rng.random_range(-1.0..1.0)).collect(),
            action: terrestrial_box().sample(rng),
            reward: if rng.random_bool(0.1) { 100.0 } else { 0.0 },
            next_state: (0..3).map(|_| rng.random_range(-1.0..1.0)).collect(),
            done: rng.random_bool(0.1),
        })
        .unwrap();
    }
    buf
}

#[test]
fn delayed_update_counts() {
    for (eta, expected) in [(2, 500), (4, 250), (8, 125)] {
        let mut rng = ChaCha8Rng::seed_from_u64(eta);
        let buf = filled_buffer(&mut rng);
        let mut agent = Td3Agent::new(3, terrestrial_box(), tiny_config(eta), &mut rng).unwrap();
        let mut reports = 0;
        for k in 1..=1000u64 {
            let r = agent.train_step(&buf, &mut rng).unwrap();
            reports += r.actor.is_some() as u64;
            assert_eq!(agent.actor_updates(), k / eta);
        }
        assert_eq!((agent.actor_updates(), reports, agent.critic_updates()), (expected, expected, 1000));
    }
}

#[test]
fn actor_and_targets_frozen_between_updates() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let buf = filled_buffer(&mut rng);
    let mut agent = Td3Agent::new(3, terrestrial_box(), tiny_config(4), &mut rng).unwrap();
    for _ in 0..3 {
        let actor = agent.actor().clone();
        let targets = (agent.actor_target().clone(), agent.critic_targets().0.clone(), agent.critic_targets().1.clone());
        for _ in 0..3 {
            let critic = agent.critics().0.clone();
            agent.train_step(&buf, &mut rng).unwrap();
            assert!(agent.actor().same_params(&actor));
            assert!(agent.actor_target().same_params(&targets.0));
            assert!(agent.critic_targets().0.same_params(&targets.1));
            assert!(agent.critic_targets().1.same_params(&targets.2));
            assert!(!agent.critics().0.same_params(&critic));
        }
        agent.train_step(&buf, &mut rng).unwrap();
        assert!(!agent.actor().same_params(&actor));
        assert!(!agent.actor_target().same_params(&targets.0));
    }
}

#[test]
fn smoothing_noise_stays_clipped() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (std, clip) = (0.2, 0.5);
    let mut clipped = 0;
    for _ in 0..1_000_000 {
        let e: f64 = clipped_gaussian(std, clip, &mut rng);
        assert!((-clip..=clip).contains(&e));
        clipped += (e.abs() == clip) as u32;
    }
    // P(|N(0, 0.2)| > 0.5) is about 1.24%.
    assert!((10_000..15_000).contains(&clipped), "{clipped}");
}

fn linear_net(w: &[f64], b: f64) -> DenseNet<f64> {
    let layer = Layer {
        weight: Array2::from_shape_vec((w.len(), 1), w.to_vec()).unwrap(),
        bias: array![b],
    };
    DenseNet::from_layers(vec![layer], OutputActivation::Identity).unwrap()
}

#[test]
fn critic_loss_matches_scalar_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let action_box = terrestrial_box();
    let actor = DenseNet::new(
        &[2, 4, 2],
        OutputActivation::Squashed { low: vec![0.0, -0.25], high: vec![0.25, 0.25] },
        &mut rng,
    )
    .unwrap();
    let w1 = [0.3, -0.2, 0.5, 1.5];
    let w2 = [-0.1, 0.4, 0.2, -0.7];
    let config = Td3Config { policy_noise_std: 0.0, eta: 1, ..Td3Config::default() };
    let agent_template =
        Td3Agent::from_networks(config, action_box, actor, linear_net(&w1, 0.05), linear_net(&w2, -0.3)).unwrap();
    let batch = Batch {
        states: array![[0.5, -1.0], [2.0, 0.25]],
        actions: array![[0.1, -0.2], [0.2, 0.05]],
        rewards: array![1.0, -10.0],
        next_states: array![[0.6, -0.9], [1.8, 0.3]],
        dones: array![0.0, 1.0],
    };
    let targets: Array1<f64> = agent_template.compute_targets(&batch, &mut rng).unwrap();
    // Independent target: r + gamma (1 - d) min(q1'(s', pi'(s')), q2'(...)).
    for i in 0..2 {
        let s2 = batch.next_states.row(i).to_vec();
        let a2 = common::forward_oracle(agent_template.actor_target(), &s2).1;
        let x: Vec<f64> = s2.iter().chain(&a2).copied().collect();
        let q = |w: &[f64], b: f64| w.iter().zip(&x).map(|(w, x)| w * x).sum::<f64>() + b;
        let expected = batch.rewards[i] + 0.99 * (1.0 - batch.dones[i]) * q(&w1, 0.05).min(q(&w2, -0.3));
        assert!((targets[i] - expected).abs() < 1e-12);
    }
    let mut agent = agent_template.clone();
    let report = agent.train_on_batch(&batch, &mut rng).unwrap();
    let t = targets.to_vec();
    assert!((report.critic1 - linear_critic_mse(&w1, 0.05, &batch, &t)).abs() < 1e-10);
    assert!((report.critic2 - linear_critic_mse(&w2, -0.3, &batch, &t)).abs() < 1e-10);
}

#[test]
fn training_is_deterministic() {
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let buf = filled_buffer(&mut rng);
        let mut agent = Td3Agent::new(3, terrestrial_box(), tiny_config(2), &mut rng).unwrap();
        (0..50)
            .map(|_| {
                let r = agent.train_step(&buf, &mut rng).unwrap();
                (r.critic1.to_bits(), r.critic2.to_bits(), r.actor.map(f64::to_bits))
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn warmup_sampler_mean_within_three_standard_errors() {
    let b = terrestrial_box();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 100_000;
    let mut sums = [0.0; 2];
    for _ in 0..n {
        let a = random_warmup_action(&b, &mut rng);
        assert!(b.contains(&a));
        sums[0] += a[0];
        sums[1] += a[1];
    }
    for i in 0..2 {
        let (lo, hi) = (b.low()[i], b.high()[i]);
        let se = (hi - lo) / 12f64.sqrt() / (n as f64).sqrt();
        let mean = sums[i] / n as f64;
        assert!((mean - 0.5 * (lo + hi)).abs() < 3.0 * se, "component {i}: {mean}");
    }
    let degenerate = ActionBox::new(vec![0.1], vec![0.1]).unwrap();
    assert_eq!(random_warmup_action(&degenerate, &mut rng), vec![0.1]);
}

#[test]
fn ou_stationary_std() {
    let (theta, sigma) = (0.15, 0.2);
    let mut ou = OuNoise::new(1, theta, sigma, 0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        ou.step(&mut rng);
    }
    let xs: Vec<f64> = (0..400_000).map(|_| ou.step(&mut rng)[0]).collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    // Continuous-time stationary std; the Euler scheme with dt=1 sits about 4% above it.
    let expected = sigma / (2.0 * theta).sqrt();
    assert!((std / expected - 1.0).abs() < 0.1, "{std} vs {expected}");
}

#[test]
fn checkpoint_restores_greedy_policy() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let buf = filled_buffer(&mut rng);
    let mut agent = Td3Agent::new(3, terrestrial_box(), tiny_config(2), &mut rng).unwrap();
    for _ in 0..7 {
        agent.train_step(&buf, &mut rng).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("agent.bin");
    agent.save_checkpoint(&path).unwrap();
    let back = Td3Agent::<f64>::load_checkpoint(&path).unwrap();
    for _ in 0..100 {
        let s: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (a, b) = (agent.act(&s).unwrap(), back.act(&s).unwrap());
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
    assert_eq!((back.critic_updates(), back.actor_updates()), (7, 3));
    let bytes = std::fs::read(&path).unwrap();
    assert!(Td3Agent::<f64>::from_bytes(&bytes[..bytes.len() - 3]).is_err());
    assert!(Td3Agent::<f32>::from_bytes(&bytes).is_err());
}

proptest! {
    #[test]
    fn explored_actions_stay_in_box(seed in 0u64..200, state in proptest::collection::vec(-5.0f64..5.0, 3)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut agent = Td3Agent::new(3, terrestrial_box(), tiny_config(2), &mut rng).unwrap();
        for _ in 0..20 {
            let a = agent.select_action(&state, true, &mut rng).unwrap();
            prop_assert!(terrestrial_box().contains(&a));
        }
    }

    #[test]
    fn targets_never_use_the_larger_critic(r in -20.0f64..200.0, q1 in -50.0f64..50.0, q2 in -50.0f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let actor = DenseNet::new(&[1, 2], OutputActivation::Squashed { low: vec![0.0, -0.25], high: vec![0.25, 0.25] }, &mut rng).unwrap();
        let config = Td3Config { gamma: 0.9, ..Td3Config::default() };
        let agent = Td3Agent::from_networks(
            config, terrestrial_box(), actor, linear_net(&[0.0; 3], q1), linear_net(&[0.0; 3], q2),
        ).unwrap();
        let batch = Batch {
            states: array![[0.0]],
            actions: array![[0.1, 0.0]],
            rewards: array![r],
            next_states: array![[1.0]],
            dones: array![0.0],
        };
        let t = agent.compute_targets(&batch, &mut rng).unwrap()[0];
        prop_assert!((t - (r + 0.9 * q1.min(q2))).abs() < 1e-9);
    }
}
