//! Plot-ready delimiter-separated output files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::metrics::{moving_average, EpisodeRecord, MetricsReport};
use super::run::{SweepReport, TrainOutput};
use crate::envs::{Mode, Scenario};
use crate::error::Result;
use crate::scalar::Scalar;

pub const STD_NOTE: &str = "# std columns use the population convention (divide by n)";

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// Per-episode training log. `warmup_steps` counts actions drawn from the
/// uniform warm-up sampler.
pub fn episodes_csv(records: &[EpisodeRecord]) -> String {
    let mut s = String::from("episode,outcome,reward,steps,time,warmup_steps,critic_updates,actor_updates\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.index, r.outcome, r.total_reward, r.steps, r.time, r.warmup_steps, r.critic_updates, r.actor_updates
        );
    }
    s
}

pub fn reward_ma_csv(records: &[EpisodeRecord], window: usize) -> String {
    let rewards: Vec<f64> = records.iter().map(|r| r.total_reward).collect();
    let ma = moving_average(&rewards, window);
    let mut s = format!("episode,reward,reward_ma_{window}\n");
    for ((r, v), m) in records.iter().zip(&rewards).zip(&ma) {
        let _ = writeln!(s, "{},{},{}", r.index, v, m);
    }
    s
}

/// One metrics row; `seed` is `None` for rows pooled over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub scenario: String,
    pub eta: u64,
    pub seed: Option<u64>,
    pub report: MetricsReport,
}

/// Metrics table: scenario, eta, success rate and episode reward, plus
/// episode time columns for the aerial task.
pub fn metrics_csv(mode: Mode, rows: &[MetricsRow]) -> String {
    let aerial = mode == Mode::Aerial;
    let per_seed = rows.iter().any(|r| r.seed.is_some());
    let mut s = format!("{STD_NOTE}\nscenario,eta,");
    if per_seed {
        s.push_str("seed,");
    }
    s.push_str("episodes,success_rate,er_mean,er_std");
    if aerial {
        s.push_str(",et_mean,et_std");
    }
    s.push('\n');
    for row in rows {
        let m = &row.report;
        let _ = write!(s, "{},{},", row.scenario, row.eta);
        if per_seed {
            let _ = write!(s, "{},", row.seed.map(|v| v.to_string()).unwrap_or_default());
        }
        let _ = write!(s, "{},{:.4},{:.4},{:.4}", m.episodes, m.success_rate, m.er_mean, m.er_std);
        if aerial {
            let _ = write!(s, ",{:.4},{:.4}", m.et_mean, m.et_std);
        }
        s.push('\n');
    }
    s
}

/// Human-readable table of the same rows.
pub fn summary_text(mode: Mode, rows: &[MetricsRow]) -> String {
    let aerial = mode == Mode::Aerial;
    let mut s = format!("{mode} navigation metrics (population std)\n");
    let _ = write!(s, "{:<20} {:>4} {:>8} {:>10} {:>10} {:>10}", "scenario", "eta", "seed", "success%", "ER mean", "ER std");
    if aerial {
        let _ = write!(s, " {:>10} {:>10}", "ET mean", "ET std");
    }
    s.push('\n');
    for row in rows {
        let m = &row.report;
        let seed = row.seed.map(|v| v.to_string()).unwrap_or_else(|| "all".into());
        let _ = write!(
            s,
            "{:<20} {:>4} {:>8} {:>10.2} {:>10.2} {:>10.2}",
            row.scenario, row.eta, seed, m.success_rate, m.er_mean, m.er_std
        );
        if aerial {
            let _ = write!(s, " {:>10.2} {:>10.2}", m.et_mean, m.et_std);
        }
        s.push('\n');
    }
    s
}

pub fn trajectory_csv(mode: Mode, record: &EpisodeRecord) -> String {
    let aerial = mode == Mode::Aerial;
    let mut s = String::from(if aerial { "step,x,y,z,yaw\n" } else { "step,x,y,yaw\n" });
    for (k, p) in record.trajectory.iter().enumerate() {
        if aerial {
            let _ = writeln!(s, "{},{},{},{},{}", k, p.x, p.y, p.z, p.yaw);
        } else {
            let _ = writeln!(s, "{},{},{},{}", k, p.x, p.y, p.yaw);
        }
    }
    s
}

/// Write `traj_<ep>.csv` for every record plus `scenario.toml` describing the
/// arena for overlay plots. Returns the trajectory paths.
pub fn export_trajectories<T: Scalar>(
    records: &[EpisodeRecord],
    dir: impl AsRef<Path>,
    mode: Mode,
    scenario: &Scenario<T>,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let geometry = toml::to_string(&scenario.to_file()).expect("scenario serializes");
    write(&dir.join("scenario.toml"), &geometry)?;
    records
        .iter()
        .map(|r| {
            let path = dir.join(format!("traj_{}.csv", r.index));
            write(&path, &trajectory_csv(mode, r))?;
            Ok(path)
        })
        .collect()
}

/// `episodes.csv`, `reward_ma.csv` and `checkpoint.bin` for a training run.
pub fn write_training_outputs<T: Scalar>(dir: impl AsRef<Path>, out: &TrainOutput<T>, ma_window: usize) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write(&dir.join("episodes.csv"), &episodes_csv(&out.episodes))?;
    write(&dir.join("reward_ma.csv"), &reward_ma_csv(&out.episodes, ma_window))?;
    out.agent.save_checkpoint(dir.join("checkpoint.bin"))
}

pub fn write_metrics(dir: impl AsRef<Path>, mode: Mode, rows: &[MetricsRow]) -> Result<()> {
    let dir = dir.as_ref();
    write(&dir.join("metrics.csv"), &metrics_csv(mode, rows))?;
    write(&dir.join("summary.txt"), &summary_text(mode, rows))
}

/// Rows pooled over seeds followed by the per-seed breakdown.
pub fn sweep_rows(report: &SweepReport) -> (Vec<MetricsRow>, Vec<MetricsRow>) {
    let pooled = report
        .rows()
        .into_iter()
        .map(|r| MetricsRow {
            scenario: r.scenario,
            eta: r.eta,
            seed: None,
            report: r.report,
        })
        .collect();
    let mut per_seed = Vec::new();
    for cell in &report.cells {
        if let Ok(c) = &cell.result {
            for e in [&c.train_eval, &c.eval_eval] {
                per_seed.push(MetricsRow {
                    scenario: e.scenario.clone(),
                    eta: cell.eta,
                    seed: Some(cell.seed),
                    report: e.report,
                });
            }
        }
    }
    (pooled, per_seed)
}

/// `metrics.csv` (pooled), `metrics_per_seed.csv`, `summary.txt`, and
/// `failures.txt` when any cell failed.
pub fn write_sweep_outputs(dir: impl AsRef<Path>, report: &SweepReport) -> Result<()> {
    let dir = dir.as_ref();
    let (pooled, per_seed) = sweep_rows(report);
    write_metrics(dir, report.mode, &pooled)?;
    write(&dir.join("metrics_per_seed.csv"), &metrics_csv(report.mode, &per_seed))?;
    let mut summary = summary_text(report.mode, &pooled);
    summary.push('\n');
    summary.push_str(&summary_text(report.mode, &per_seed));
    write(&dir.join("summary.txt"), &summary)?;
    let failures: Vec<String> = report
        .failures()
        .map(|c| format!("eta={} seed={}: {}", c.eta, c.seed, c.result.as_ref().err().unwrap()))
        .collect();
    if !failures.is_empty() {
        write(&dir.join("failures.txt"), &(failures.join("\n") + "\n"))?;
    }
    Ok(())
}
