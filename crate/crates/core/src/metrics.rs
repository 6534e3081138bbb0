//! Trajectory-accuracy and driving-quality metrics over episode logs.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::log::{EpisodeLog, Outcome};
use crate::vec2::Vec2;

fn check_nonempty(simulated: &[Vec2], truth: &[Vec2]) -> Result<()> {
    if simulated.is_empty() || truth.is_empty() {
        Err(SimError::Validation("trajectory is empty".into()))
    } else {
        Ok(())
    }
}

/// Mean displacement over the common prefix of the two trajectories.
pub fn ade(simulated: &[Vec2], truth: &[Vec2]) -> Result<f64> {
    check_nonempty(simulated, truth)?;
    let n = simulated.len().min(truth.len());
    Ok(simulated.iter().zip(truth).map(|(a, b)| a.distance(*b)).sum::<f64>() / n as f64)
}

/// Displacement at truth's final timestamp (or the simulation's last state
/// if it ends earlier).
pub fn fde(simulated: &[Vec2], truth: &[Vec2]) -> Result<f64> {
    check_nonempty(simulated, truth)?;
    let t = truth.len().min(simulated.len()) - 1;
    Ok(simulated[t].distance(truth[truth.len() - 1]))
}

/// Episode mean of per-episode ADE.
pub fn mean_ade(pairs: &[(Vec<Vec2>, Vec<Vec2>)]) -> Result<f64> {
    episode_mean(pairs, ade)
}

pub fn mean_fde(pairs: &[(Vec<Vec2>, Vec<Vec2>)]) -> Result<f64> {
    episode_mean(pairs, fde)
}

fn episode_mean(pairs: &[(Vec<Vec2>, Vec<Vec2>)], metric: fn(&[Vec2], &[Vec2]) -> Result<f64>) -> Result<f64> {
    if pairs.is_empty() {
        return Err(SimError::Validation("no episodes to score".into()));
    }
    let mut total = 0.0;
    for (s, t) in pairs {
        total += metric(s, t)?;
    }
    Ok(total / pairs.len() as f64)
}

/// Fraction of episodes in which any simulated pedestrian touched anyone.
pub fn pedestrian_cr(logs: &[EpisodeLog]) -> Result<f64> {
    if logs.is_empty() {
        return Err(SimError::Validation("no episodes to score".into()));
    }
    let hits = logs.iter().filter(|log| log.simulated_ids().any(|id| log.any_collision_involving(id))).count();
    Ok(hits as f64 / logs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MetricsReport {
    pub episodes: usize,
    pub ade: Option<f64>,
    pub fde: Option<f64>,
    pub cr: Option<f64>,
    pub success_rate: f64,
    pub collision_rate: f64,
    pub timeout_rate: f64,
    pub avg_speed: f64,
    pub avg_jerk: f64,
    pub avg_max_abs_accel: f64,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str =
        "episodes,ade,fde,cr,success_rate,collision_rate,timeout_rate,avg_speed,avg_jerk,avg_max_abs_accel";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.episodes,
            opt(self.ade),
            opt(self.fde),
            opt(self.cr),
            self.success_rate,
            self.collision_rate,
            self.timeout_rate,
            self.avg_speed,
            self.avg_jerk,
            self.avg_max_abs_accel
        )
    }
}

/// AV-side report: outcome rates, mean speed, mean jerk, mean per-episode
/// peak |acceleration|.
pub fn av_report(logs: &[EpisodeLog]) -> Result<MetricsReport> {
    if logs.is_empty() {
        return Err(SimError::Validation("no episodes to report".into()));
    }
    let mut counts = [0usize; 3];
    let (mut speed_sum, mut speed_n) = (0.0, 0usize);
    let (mut jerk_sum, mut jerk_n) = (0.0, 0usize);
    let mut peak_sum = 0.0;
    for log in logs {
        match log.outcome {
            Outcome::Success => counts[0] += 1,
            Outcome::Collision => counts[1] += 1,
            Outcome::Timeout => counts[2] += 1,
            Outcome::Running => {
                return Err(SimError::Validation(format!("episode '{}' has not finished", log.scenario_id)));
            }
        }
        let av: Vec<_> = log.steps.iter().map(|s| s.agents[0]).collect();
        for snap in &av {
            speed_sum += snap.speed;
            speed_n += 1;
        }
        for pair in av.windows(2) {
            jerk_sum += (pair[1].accel - pair[0].accel).abs() / log.dt;
            jerk_n += 1;
        }
        peak_sum += av.iter().map(|s| s.accel.abs()).fold(0.0, f64::max);
    }
    let n = logs.len() as f64;
    let mean = |sum: f64, count: usize| if count == 0 { 0.0 } else { sum / count as f64 };
    Ok(MetricsReport {
        episodes: logs.len(),
        ade: None,
        fde: None,
        cr: None,
        success_rate: counts[0] as f64 / n,
        collision_rate: counts[1] as f64 / n,
        timeout_rate: counts[2] as f64 / n,
        avg_speed: mean(speed_sum, speed_n),
        avg_jerk: mean(jerk_sum, jerk_n),
        avg_max_abs_accel: peak_sum / n,
    })
}
