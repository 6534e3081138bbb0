//! Seeded uniform random search over pedestrian-model parameters, scored by
//! ADE against recorded trajectories.

use std::collections::BTreeMap;

use cogrisk_core::metrics::{ade, av_report, mean_ade, mean_fde, pedestrian_cr};
use cogrisk_core::{run_replay, EpisodeLog, MetricsReport, ModelParams, PedestrianModelKind, Scenario, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};
use crate::par::par_map;

/// Every calibratable scalar, by name.
pub const PARAMETER_NAMES: [&str; 12] =
    ["v0", "tau", "a_veh", "b_veh", "a_ped", "b_ped", "gamma1", "gamma2", "lambda1", "lambda2", "lambda3", "lambda_adj"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    pub model: PedestrianModelKind,
    /// Search box `[min, max]` per parameter name.
    pub parameters: BTreeMap<String, [f64; 2]>,
    pub budget: usize,
    /// Overrides the seed derived from the toolkit's master seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Values of the parameters outside the search boxes.
    #[serde(default)]
    pub base: ModelParams,
}

pub fn set_parameter(params: &mut ModelParams, name: &str, value: f64) -> Result<()> {
    let slot = match name {
        "v0" => &mut params.sfm.v0,
        "tau" => &mut params.sfm.tau,
        "a_veh" => &mut params.sfm.a_veh,
        "b_veh" => &mut params.sfm.b_veh,
        "a_ped" => &mut params.sfm.a_ped,
        "b_ped" => &mut params.sfm.b_ped,
        "gamma1" => &mut params.risk.gamma1,
        "gamma2" => &mut params.risk.gamma2,
        "lambda1" => &mut params.risk.lambda1,
        "lambda2" => &mut params.risk.lambda2,
        "lambda3" => &mut params.risk.lambda3,
        "lambda_adj" => &mut params.risk.lambda_adj,
        other => {
            return Err(ShellError::Validation(format!("unknown parameter '{other}'; expected one of {}", PARAMETER_NAMES.join(", "))))
        }
    };
    *slot = value;
    Ok(())
}

impl CalibrationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(ShellError::Validation("budget must be at least 1".into()));
        }
        self.base.validate()?;
        for (name, &[lo, hi]) in &self.parameters {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(ShellError::Validation(format!("parameter '{name}': box [{lo}, {hi}] is empty")));
            }
            for v in [lo, hi] {
                let mut p = self.base;
                set_parameter(&mut p, name, v)?;
                p.validate().map_err(|e| ShellError::Validation(format!("parameter '{name}' box [{lo}, {hi}]: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn apply(&self, values: &BTreeMap<String, f64>) -> Result<ModelParams> {
        let mut p = self.base;
        for (name, &v) in values {
            set_parameter(&mut p, name, v)?;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub trial: usize,
    pub parameters: BTreeMap<String, f64>,
    pub ade: f64,
    /// Lowest ADE over trials 0..=trial.
    pub best_ade: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub model: PedestrianModelKind,
    pub best_trial: usize,
    pub best_ade: f64,
    pub best_parameters: BTreeMap<String, f64>,
    /// The full parameter set of the best trial.
    pub params: ModelParams,
    pub trials: Vec<Trial>,
}

impl CalibrationResult {
    pub fn trials_csv(&self) -> String {
        let names: Vec<&String> = self.trials.first().map(|t| t.parameters.keys().collect()).unwrap_or_default();
        let mut out = String::from("trial,ade,best_ade");
        for n in &names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for t in &self.trials {
            out.push_str(&format!("{},{},{}", t.trial, t.ade, t.best_ade));
            for v in t.parameters.values() {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// One rollout per (scenario, recorded pedestrian): that pedestrian follows
/// `model` while every other agent replays its recording, with force noise
/// switched off. Returns each log with the simulated agent's index and its
/// recorded positions.
pub fn ghost_rollouts(truth: &[Scenario], model: PedestrianModelKind, params: &ModelParams) -> Result<Vec<(EpisodeLog, usize, Vec<Vec2>)>> {
    let mut out = Vec::new();
    for scenario in truth {
        if scenario.replay.first().map_or(true, Option::is_none) {
            return Err(ShellError::Validation(format!("scenario '{}' has no recorded AV trajectory", scenario.id)));
        }
        for j in 1..scenario.agents.len() {
            let Some(recorded) = &scenario.replay[j] else { continue };
            if recorded.len() < 2 {
                continue;
            }
            let mut s = scenario.clone();
            s.model = model;
            s.replay[j] = None;
            s.force_noise = vec![0.0; s.agents.len()];
            let log = run_replay(&s, params, recorded.len() - 1)?;
            out.push((log, j, recorded.positions()));
        }
    }
    if out.is_empty() {
        return Err(ShellError::Validation("no recorded pedestrian trajectories to score against".into()));
    }
    Ok(out)
}

/// Mean ADE over all ghost rollouts.
pub fn objective(truth: &[Scenario], model: PedestrianModelKind, params: &ModelParams) -> Result<f64> {
    let rollouts = ghost_rollouts(truth, model, params)?;
    let mut total = 0.0;
    for (log, j, recorded) in &rollouts {
        total += ade(&log.trajectory(*j), recorded)?;
    }
    Ok(total / rollouts.len() as f64)
}

/// ADE, FDE and collision rate of a pedestrian model over ghost rollouts,
/// alongside the outcome rates of those rollouts.
pub fn pedestrian_report(truth: &[Scenario], model: PedestrianModelKind, params: &ModelParams) -> Result<(MetricsReport, Vec<EpisodeLog>)> {
    let rollouts = ghost_rollouts(truth, model, params)?;
    let pairs: Vec<(Vec<Vec2>, Vec<Vec2>)> = rollouts.iter().map(|(log, j, rec)| (log.trajectory(*j), rec.clone())).collect();
    let logs: Vec<EpisodeLog> = rollouts.into_iter().map(|(log, _, _)| log).collect();
    let mut report = av_report(&logs)?;
    report.ade = Some(mean_ade(&pairs)?);
    report.fde = Some(mean_fde(&pairs)?);
    report.cr = Some(pedestrian_cr(&logs)?);
    Ok((report, logs))
}

/// Draws `budget` parameter vectors uniformly from the boxes and keeps the
/// one with the lowest objective (earliest on ties).
pub fn calibrate(spec: &CalibrationSpec, truth: &[Scenario], seed: u64) -> Result<CalibrationResult> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.unwrap_or(seed));
    let samples: Vec<BTreeMap<String, f64>> = (0..spec.budget)
        .map(|_| {
            spec.parameters
                .iter()
                .map(|(name, &[lo, hi])| (name.clone(), if lo == hi { lo } else { rng.random_range(lo..=hi) }))
                .collect()
        })
        .collect();
    let scores = par_map(&samples, |values| objective(truth, spec.model, &spec.apply(values)?));
    let mut trials = Vec::with_capacity(samples.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, (parameters, score)) in samples.into_iter().zip(scores).enumerate() {
        let score = score?;
        if best.map_or(true, |(_, b)| score < b) {
            best = Some((i, score));
        }
        trials.push(Trial { trial: i, parameters, ade: score, best_ade: best.expect("set above").1 });
    }
    let (best_trial, best_ade) = best.expect("budget is at least 1");
    let best_parameters = trials[best_trial].parameters.clone();
    Ok(CalibrationResult {
        model: spec.model,
        best_trial,
        best_ade,
        params: spec.apply(&best_parameters)?,
        best_parameters,
        trials,
    })
}
