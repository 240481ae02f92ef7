use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::Rng;

use super::config::ExperimentConfig;
use super::metrics::{EpisodeRecord, MetricsReport, TrajPoint};
use super::streams::{stream_rng, RunStreams, Stream};
use crate::agent::{random_warmup_action, Td3Agent};
use crate::envs::{EnvSpec, EnvState, Mode, NavEnv, Outcome, Scenario};
use crate::error::{Error, Result};
use crate::replay::{ReplayBuffer, Transition};
use crate::scalar::Scalar;

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutput<T> {
    pub agent: Td3Agent<T>,
    pub episodes: Vec<EpisodeRecord>,
    pub total_steps: u64,
    pub warmup_steps: u64,
    /// Number of `train_step` calls.
    pub train_steps: u64,
}

/// Greedy evaluation on one scenario.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub scenario: String,
    pub report: MetricsReport,
    pub records: Vec<EpisodeRecord>,
}

fn point<T: Scalar>(s: &EnvState<T>) -> TrajPoint {
    TrajPoint {
        x: s.x.as_f64(),
        y: s.y.as_f64(),
        z: s.z.as_f64(),
        yaw: s.yaw.as_f64(),
    }
}

/// Run one episode from a fresh reset, choosing actions with `policy`.
fn run_episode<T: Scalar, R: Rng + ?Sized>(
    env: &mut NavEnv<T>,
    index: usize,
    env_rng: &mut R,
    mut policy: impl FnMut(&[T]) -> Result<Vec<T>>,
) -> Result<EpisodeRecord> {
    let mut obs = env.reset(env_rng)?;
    let mut trajectory = vec![point(env.state())];
    let mut total_reward = 0.0;
    let mut outcome = Outcome::Running;
    while !outcome.is_terminal() {
        let action = policy(&obs)?;
        let step = env.step(&action)?;
        total_reward += step.reward.as_f64();
        trajectory.push(point(env.state()));
        outcome = step.outcome;
        obs = step.observation;
    }
    let steps = env.state().ep;
    Ok(EpisodeRecord {
        index,
        outcome,
        total_reward,
        steps,
        time: steps as f64 * env.spec().dt.as_f64(),
        warmup_steps: 0,
        critic_updates: 0,
        actor_updates: 0,
        trajectory,
    })
}

fn at_episode(index: usize, e: Error) -> Error {
    match e {
        Error::NonFinite(m) => Error::NonFinite(format!("episode {index}: {m}")),
        other => other,
    }
}

/// Train on the configured training scenario.
pub fn train<T: Scalar>(config: &ExperimentConfig) -> Result<TrainOutput<T>> {
    train_with(config, |_| {})
}

/// [`train`], calling `on_episode` after every finished episode.
pub fn train_with<T: Scalar>(
    config: &ExperimentConfig,
    mut on_episode: impl FnMut(&EpisodeRecord),
) -> Result<TrainOutput<T>> {
    config.validate()?;
    let spec: EnvSpec<T> = config.env.spec()?;
    let mut env = NavEnv::new(spec.clone(), config.env.train_scenario()?)?;
    let mut rngs = RunStreams::new(config.run.seed);
    let td3 = &config.td3;
    let mut agent = Td3Agent::new(spec.observation_width(), spec.action_box.clone(), td3.clone(), &mut rngs.init)?;
    let mut buffer = ReplayBuffer::new(td3.buffer_capacity, spec.observation_width(), spec.action_width())?;

    let mut total_steps = 0u64;
    let mut warmup_steps = 0u64;
    let mut train_steps = 0u64;
    let mut episodes = Vec::with_capacity(config.run.train_episodes);
    for index in 0..config.run.train_episodes {
        let mut obs = env.reset(&mut rngs.env)?;
        agent.reset_noise();
        let mut trajectory = vec![point(env.state())];
        let mut total_reward = 0.0;
        let mut episode_warmup = 0u32;
        loop {
            let action = if total_steps < td3.start_steps {
                episode_warmup += 1;
                random_warmup_action(&spec.action_box, &mut rngs.explore)
            } else {
                agent.select_action(&obs, true, &mut rngs.explore)?
            };
            let step = env.step(&action)?;
            total_reward += step.reward.as_f64();
            trajectory.push(point(env.state()));
            buffer.push(Transition {
                state: obs,
                action,
                reward: step.reward,
                next_state: step.observation.clone(),
                done: step.done,
            })?;
            total_steps += 1;
            if total_steps > td3.start_steps {
                agent
                    .train_step(&buffer, &mut rngs.update)
                    .map_err(|e| at_episode(index, e))?;
                train_steps += 1;
            }
            obs = step.observation;
            if step.done {
                break;
            }
        }
        warmup_steps += u64::from(episode_warmup);
        let steps = env.state().ep;
        let record = EpisodeRecord {
            index,
            outcome: env.state().outcome,
            total_reward,
            steps,
            time: steps as f64 * spec.dt.as_f64(),
            warmup_steps: episode_warmup,
            critic_updates: agent.critic_updates(),
            actor_updates: agent.actor_updates(),
            trajectory,
        };
        on_episode(&record);
        episodes.push(record);
    }
    Ok(TrainOutput {
        agent,
        episodes,
        total_steps,
        warmup_steps,
        train_steps,
    })
}

/// Greedy rollouts of `agent`. Takes the agent by shared reference, so it can
/// neither learn nor store transitions.
pub fn evaluate<T: Scalar>(
    agent: &Td3Agent<T>,
    spec: &EnvSpec<T>,
    scenario: &Scenario<T>,
    episodes: usize,
    seed: u64,
) -> Result<Evaluation> {
    if agent.state_width() != spec.observation_width() || agent.action_width() != spec.action_width() {
        return Err(Error::InvalidArgument(format!(
            "agent has state/action widths {}/{} but the {} environment needs {}/{}",
            agent.state_width(),
            agent.action_width(),
            spec.mode,
            spec.observation_width(),
            spec.action_width()
        )));
    }
    let mut env = NavEnv::new(spec.clone(), scenario.clone())?;
    let mut rng = stream_rng(seed, Stream::Eval);
    let records = (0..episodes)
        .map(|i| run_episode(&mut env, i, &mut rng, |obs| agent.act(obs)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Evaluation {
        scenario: scenario.name.clone(),
        report: MetricsReport::from_records(&records),
        records,
    })
}

/// Uniform-random policy on the training env stream of `seed`, for baselines.
pub fn random_policy_episodes<T: Scalar>(
    spec: &EnvSpec<T>,
    scenario: &Scenario<T>,
    episodes: usize,
    seed: u64,
) -> Result<Vec<EpisodeRecord>> {
    let mut env = NavEnv::new(spec.clone(), scenario.clone())?;
    let mut rngs = RunStreams::new(seed);
    (0..episodes)
        .map(|i| {
            let explore = &mut rngs.explore;
            run_episode(&mut env, i, &mut rngs.env, |_| Ok(spec.action_box.sample(explore)))
        })
        .collect()
}

/// Metrics of one trained (eta, seed) cell on both scenarios.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub training_episodes: Vec<EpisodeRecord>,
    pub train_eval: Evaluation,
    pub eval_eval: Evaluation,
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub eta: u64,
    pub seed: u64,
    pub result: std::result::Result<CellResult, String>,
}

/// One aggregated row: all seeds of one eta on one scenario, pooled by episode.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    pub eta: u64,
    pub seeds: usize,
    pub report: MetricsReport,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub mode: Mode,
    pub train_scenario: String,
    pub eval_scenario: String,
    pub etas: Vec<u64>,
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    /// Pooled rows, train scenario first, then eval scenario, eta ascending in input order.
    pub fn rows(&self) -> Vec<SweepRow> {
        let mut rows = Vec::new();
        for (scenario, pick) in [
            (&self.train_scenario, (|c: &CellResult| &c.train_eval) as fn(&CellResult) -> &Evaluation),
            (&self.eval_scenario, |c: &CellResult| &c.eval_eval),
        ] {
            for &eta in &self.etas {
                let ok: Vec<&CellResult> = self
                    .cells
                    .iter()
                    .filter(|c| c.eta == eta)
                    .filter_map(|c| c.result.as_ref().ok())
                    .collect();
                if ok.is_empty() {
                    continue;
                }
                let pooled: Vec<EpisodeRecord> = ok.iter().flat_map(|c| pick(c).records.iter().cloned()).collect();
                rows.push(SweepRow {
                    scenario: scenario.clone(),
                    eta,
                    seeds: ok.len(),
                    report: MetricsReport::from_records(&pooled),
                });
            }
        }
        rows
    }

    /// Seed-averaged drop in success rate from the train to the eval scenario.
    pub fn mean_success_drop(&self, eta: u64) -> Option<f64> {
        let drops: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.eta == eta)
            .filter_map(|c| c.result.as_ref().ok())
            .map(|c| c.train_eval.report.success_rate - c.eval_eval.report.success_rate)
            .collect();
        (!drops.is_empty()).then(|| drops.iter().sum::<f64>() / drops.len() as f64)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(|c| c.result.is_err())
    }
}

fn run_cell<T: Scalar>(template: &ExperimentConfig, eta: u64, seed: u64) -> Result<CellResult> {
    let mut config = template.clone();
    config.td3.eta = eta;
    config.run.seed = seed;
    let out = train::<T>(&config)?;
    let spec: EnvSpec<T> = config.env.spec()?;
    let episodes = config.run.eval_episodes;
    let train_eval = evaluate(&out.agent, &spec, &config.env.train_scenario()?, episodes, seed)?;
    let eval_eval = evaluate(&out.agent, &spec, &config.env.eval_scenario()?, episodes, seed)?;
    Ok(CellResult {
        training_episodes: out.episodes,
        train_eval,
        eval_eval,
    })
}

/// Train and evaluate every (eta, seed) cell. Cells run on up to `workers`
/// threads; a failing cell is recorded and the rest continue.
pub fn sweep<T: Scalar>(
    template: &ExperimentConfig,
    etas: &[u64],
    seeds: &[u64],
    workers: usize,
    on_cell: impl Fn(&SweepCell) + Sync,
) -> Result<SweepReport> {
    if etas.is_empty() || seeds.is_empty() {
        return Err(Error::Config("sweep needs at least one eta and one seed".into()));
    }
    template.validate()?;
    let jobs: Vec<(u64, u64)> = etas.iter().flat_map(|&e| seeds.iter().map(move |&s| (e, s))).collect();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SweepCell>>> = Mutex::new(vec![None; jobs.len()]);
    let workers = workers.clamp(1, jobs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(eta, seed)) = jobs.get(i) else { break };
                let cell = SweepCell {
                    eta,
                    seed,
                    result: run_cell::<T>(template, eta, seed).map_err(|e| e.to_string()),
                };
                on_cell(&cell);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(cell);
            });
        }
    });
    let cells = slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|c| c.expect("every job ran"))
        .collect();
    Ok(SweepReport {
        mode: template.env.mode,
        train_scenario: template.env.train_scenario_name().to_string(),
        eval_scenario: template.env.eval_scenario_name().to_string(),
        etas: etas.to_vec(),
        cells,
    })
}
