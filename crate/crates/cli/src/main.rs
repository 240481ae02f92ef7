use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use dpu_core::envs::{resolve_scenario, EnvSpec, Mode};
use dpu_core::harness::{
    episodes_csv, evaluate, export_trajectories, summary_text, sweep, train_with, write_metrics, write_sweep_outputs,
    write_training_outputs, EnvSection, Evaluation, ExperimentConfig, MetricsRow,
};
use dpu_core::Td3Agent64;

#[derive(Parser)]
#[command(name = "dpu-bench", version, about = "Train and evaluate TD3 navigation agents with delayed policy updates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent, then evaluate it on the train and eval scenarios.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Suppress per-episode progress on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Greedy evaluation of a saved agent.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Builtin scenario name or scenario file.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        episodes: usize,
        #[arg(long)]
        seed: u64,
        /// Experiment config whose [env] section overrides the environment.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write metrics, episode log and trajectories here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and evaluate every (eta, seed) cell.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        etas: Vec<u64>,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        seeds: Vec<u64>,
        #[arg(long, default_value = "sweep-out")]
        out: PathBuf,
        /// Worker threads (defaults to available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train { config, seed, out, quiet } => cmd_train(&config, seed, &out, quiet),
        Command::Eval {
            checkpoint,
            scenario,
            episodes,
            seed,
            config,
            out,
        } => cmd_eval(&checkpoint, &scenario, episodes, seed, config.as_deref(), out.as_deref()),
        Command::Sweep {
            config,
            etas,
            seeds,
            out,
            jobs,
        } => cmd_sweep(&config, &etas, &seeds, &out, jobs),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("loading config {}", path.display()))
}

fn metrics_row(eval: &Evaluation, eta: u64) -> MetricsRow {
    MetricsRow {
        scenario: eval.scenario.clone(),
        eta,
        seed: None,
        report: eval.report,
    }
}

fn cmd_train(config_path: &Path, seed: u64, out: &Path, quiet: bool) -> Result<()> {
    let mut config = load_config(config_path)?;
    config.run.seed = seed;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("config.toml"), config.to_toml())?;

    let total = config.run.train_episodes;
    let trained = train_with::<f64>(&config, |r| {
        if !quiet {
            eprintln!("episode {:>5}/{total} {:<8} reward {:>7} steps {:>4}", r.index + 1, r.outcome, r.total_reward, r.steps);
        }
    })?;
    write_training_outputs(out, &trained, config.run.ma_window)?;

    let spec: EnvSpec<f64> = config.env.spec()?;
    let mut rows = Vec::new();
    for scenario in [config.env.train_scenario()?, config.env.eval_scenario()?] {
        let eval = evaluate(&trained.agent, &spec, &scenario, config.run.eval_episodes, seed)?;
        if config.run.export_trajectories {
            export_trajectories(&eval.records, out.join("traj").join(&scenario.name), spec.mode, &scenario)?;
        }
        rows.push(metrics_row(&eval, config.td3.eta));
    }
    write_metrics(out, spec.mode, &rows)?;
    print!("{}", summary_text(spec.mode, &rows));
    println!(
        "{} env steps ({} warm-up), {} critic updates, {} actor updates; outputs in {}",
        trained.total_steps,
        trained.warmup_steps,
        trained.agent.critic_updates(),
        trained.agent.actor_updates(),
        out.display()
    );
    Ok(())
}

fn infer_env(agent: &Td3Agent64, config: Option<&Path>) -> Result<EnvSection> {
    if let Some(path) = config {
        return Ok(load_config(path)?.env);
    }
    for mode in [Mode::Terrestrial, Mode::Aerial] {
        let spec = EnvSpec::<f64>::for_mode(mode);
        if spec.observation_width() == agent.state_width() && spec.action_width() == agent.action_width() {
            return Ok(EnvSection::for_mode(mode));
        }
    }
    bail!(
        "checkpoint has state width {} and action width {}, which match no default environment; pass --config",
        agent.state_width(),
        agent.action_width()
    )
}

fn cmd_eval(
    checkpoint: &Path,
    scenario: &str,
    episodes: usize,
    seed: u64,
    config: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    if episodes == 0 {
        bail!("--episodes must be at least 1");
    }
    let agent = Td3Agent64::load_checkpoint(checkpoint)
        .with_context(|| format!("loading checkpoint {}", checkpoint.display()))?;
    let env = infer_env(&agent, config)?;
    let spec: EnvSpec<f64> = env.spec()?;
    let scenario = resolve_scenario::<f64>(scenario)?;
    let eval = evaluate(&agent, &spec, &scenario, episodes, seed)?;
    let rows = [metrics_row(&eval, agent.config().eta)];
    if let Some(out) = out {
        write_metrics(out, spec.mode, &rows)?;
        std::fs::write(out.join("episodes.csv"), episodes_csv(&eval.records))?;
        export_trajectories(&eval.records, out, spec.mode, &scenario)?;
    }
    print!("{}", summary_text(spec.mode, &rows));
    Ok(())
}

fn cmd_sweep(config_path: &Path, etas: &[u64], seeds: &[u64], out: &Path, jobs: Option<usize>) -> Result<()> {
    let config = load_config(config_path)?;
    let workers = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = sweep::<f64>(&config, etas, seeds, workers, |cell| match &cell.result {
        Ok(c) => eprintln!(
            "eta={} seed={}: train {:.1}% eval {:.1}%",
            cell.eta, cell.seed, c.train_eval.report.success_rate, c.eval_eval.report.success_rate
        ),
        Err(e) => eprintln!("eta={} seed={}: failed: {e}", cell.eta, cell.seed),
    })?;
    write_sweep_outputs(out, &report)?;
    print!("{}", std::fs::read_to_string(out.join("summary.txt"))?);
    let failed = report.failures().count();
    if failed > 0 {
        bail!("{failed} of {} cells failed; see {}", report.cells.len(), out.join("failures.txt").display());
    }
    Ok(())
}
