use crate::envs::Outcome;

/// Pose sample written to trajectory files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

/// One finished episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub index: usize,
    pub outcome: Outcome,
    pub total_reward: f64,
    pub steps: u32,
    /// `steps * dt` in seconds.
    pub time: f64,
    /// Steps in this episode whose action came from the uniform warm-up sampler.
    pub warmup_steps: u32,
    pub critic_updates: u64,
    pub actor_updates: u64,
    /// Poses from reset through the final step (`steps + 1` entries).
    pub trajectory: Vec<TrajPoint>,
}

impl EpisodeRecord {
    pub fn arrived(&self) -> bool {
        self.outcome == Outcome::Arrive
    }
}

/// Success rate and episode reward / time statistics.
///
/// Standard deviations use the population convention (divide by n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub episodes: usize,
    pub success_rate: f64,
    pub er_mean: f64,
    pub er_std: f64,
    pub et_mean: f64,
    pub et_std: f64,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.max(0.0).sqrt())
}

impl MetricsReport {
    pub fn from_records(records: &[EpisodeRecord]) -> Self {
        let rewards: Vec<f64> = records.iter().map(|r| r.total_reward).collect();
        let times: Vec<f64> = records.iter().map(|r| r.time).collect();
        let (er_mean, er_std) = mean_std(&rewards);
        let (et_mean, et_std) = mean_std(&times);
        let arrivals = records.iter().filter(|r| r.arrived()).count();
        let success_rate = if records.is_empty() {
            0.0
        } else {
            arrivals as f64 * 100.0 / records.len() as f64
        };
        Self {
            episodes: records.len(),
            success_rate,
            er_mean,
            er_std,
            et_mean,
            et_std,
        }
    }
}

/// Trailing mean; element `i` averages the last `min(i + 1, window)` values.
pub fn moving_average(series: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for (i, &v) in series.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= series[i - window];
        }
        let n = (i + 1).min(window);
        // Recompute the sum exactly every window to bound drift on long series.
        if i % window == window - 1 {
            sum = series[i + 1 - n..=i].iter().sum();
        }
        out.push(sum / n as f64);
    }
    out
}
