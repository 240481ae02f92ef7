//! Experiment orchestration: configuration, seeded training and evaluation,
//! eta sweeps, metrics and file output.

mod config;
mod export;
mod metrics;
mod run;
mod streams;

pub use config::{EnvSection, ExperimentConfig, RunSection};
pub use export::{
    episodes_csv, export_trajectories, metrics_csv, reward_ma_csv, summary_text, sweep_rows, trajectory_csv,
    write_metrics, write_sweep_outputs, write_training_outputs, MetricsRow, STD_NOTE,
};
pub use metrics::{mean_std, moving_average, EpisodeRecord, MetricsReport, TrajPoint};
pub use run::{
    evaluate, random_policy_episodes, sweep, train, train_with, CellResult, Evaluation, SweepCell, SweepReport,
    SweepRow, TrainOutput,
};
pub use streams::{stream_rng, RunStreams, Stream};
