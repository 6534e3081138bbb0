//! Predict–observe–update loop over other agents' velocities.
//!
//! Each observer keeps, per observed agent, an independent Gaussian per
//! velocity component. Every step the previous posterior is turned into a
//! prior by a velocity predictor plus process-noise inflation, compared
//! against the observation distribution by KL divergence (the cognitive
//! uncertainty), and then fused with it by a conjugate Bayesian update.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::vec2::Vec2;

pub const VARIANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CognitionParams {
    /// Fixed observation variance σ_o², (m/s)².
    pub sigma_obs_sq: f64,
    /// Per-step prior inflation q, (m/s)².
    pub process_noise_sq: f64,
    /// Prior variance on first contact, (m/s)².
    pub sigma_init_sq: f64,
}

impl Default for CognitionParams {
    fn default() -> Self {
        Self { sigma_obs_sq: 0.04, process_noise_sq: 0.05, sigma_init_sq: 1.0 }
    }
}

impl CognitionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_obs_sq > 0.0 && self.sigma_init_sq > 0.0 && self.process_noise_sq >= 0.0)
            || !(self.sigma_obs_sq.is_finite() && self.sigma_init_sq.is_finite() && self.process_noise_sq.is_finite())
        {
            return Err(SimError::Validation(format!("invalid cognition parameters {self:?}")));
        }
        Ok(())
    }

    /// Stationary posterior variance of the recursion for a steadily observed agent:
    /// the positive root of s² + s·q − σ_o²·q = 0.
    pub fn stationary_posterior_variance(&self) -> f64 {
        let q = self.process_noise_sq;
        (-q + (q * q + 4.0 * self.sigma_obs_sq * q).sqrt()) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBelief {
    pub mean: Vec2,
    /// Per-component variance (x, y).
    pub variance: [f64; 2],
}

impl GaussianBelief {
    pub fn new(mean: Vec2, variance: [f64; 2]) -> Self {
        Self { mean, variance }
    }

    pub fn isotropic(mean: Vec2, variance: f64) -> Self {
        Self::new(mean, [variance, variance])
    }

    fn means(&self) -> [f64; 2] {
        [self.mean.x, self.mean.y]
    }

    fn validate(&self) -> Result<()> {
        if self.variance.iter().all(|&v| v > 0.0 && v.is_finite()) && self.mean.is_finite() {
            Ok(())
        } else {
            Err(SimError::Validation(format!("belief requires finite mean and positive variance, got {self:?}")))
        }
    }
}

/// Observation distribution: the observed velocity with fixed variance.
pub type ObservationDistribution = GaussianBelief;

/// KL(p ‖ o) summed over the two independent velocity components.
pub fn kl_gaussian(p: &GaussianBelief, o: &ObservationDistribution) -> Result<f64> {
    p.validate()?;
    o.validate()?;
    let (pm, om) = (p.means(), o.means());
    let kl = (0..2)
        .map(|k| {
            let (vp, vo) = (p.variance[k], o.variance[k]);
            let gap = pm[k] - om[k];
            0.5 * (vo / vp).ln() + (vp + gap * gap) / (2.0 * vo) - 0.5
        })
        .sum::<f64>();
    // Rounding can leave a tiny negative residue for identical inputs.
    Ok(kl.max(0.0))
}

/// Conjugate update of a Gaussian prior with a Gaussian observation.
pub fn bayes_update(prior: &GaussianBelief, obs: &ObservationDistribution) -> Result<GaussianBelief> {
    prior.validate()?;
    obs.validate()?;
    let (pm, om) = (prior.means(), obs.means());
    let mut mean = [0.0; 2];
    let mut variance = [0.0; 2];
    for k in 0..2 {
        let precision = 1.0 / prior.variance[k] + 1.0 / obs.variance[k];
        variance[k] = (1.0 / precision).max(VARIANCE_FLOOR);
        mean[k] = (pm[k] / prior.variance[k] + om[k] / obs.variance[k]) / precision;
    }
    Ok(GaussianBelief::new(Vec2::new(mean[0], mean[1]), variance))
}

/// Internal model used to extrapolate another agent's velocity one step ahead.
pub trait VelocityPredictor {
    fn predict(&self, posterior: &GaussianBelief, last_observed: Vec2) -> Vec2;
}

/// Assumes the other agent keeps its last observed velocity.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantVelocity;

impl VelocityPredictor for ConstantVelocity {
    fn predict(&self, _posterior: &GaussianBelief, last_observed: Vec2) -> Vec2 {
        last_observed
    }
}

/// Prior for the current step under the constant-velocity model.
pub fn predict_velocity(prev_posterior: &GaussianBelief, last_observed_velocity: Vec2, process_noise_sq: f64) -> GaussianBelief {
    predict_with(&ConstantVelocity, prev_posterior, last_observed_velocity, process_noise_sq)
}

fn predict_with<P: VelocityPredictor + ?Sized>(
    predictor: &P,
    prev_posterior: &GaussianBelief,
    last_observed: Vec2,
    process_noise_sq: f64,
) -> GaussianBelief {
    let mean = predictor.predict(prev_posterior, last_observed);
    let variance = prev_posterior.variance.map(|v| (v + process_noise_sq).max(VARIANCE_FLOOR));
    GaussianBelief::new(mean, variance)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct TrackedAgent {
    posterior: GaussianBelief,
    last_observed: Vec2,
    uncertainty: f64,
}

/// One observer's beliefs about every agent it has seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CognitiveTracker {
    params: CognitionParams,
    tracked: BTreeMap<usize, TrackedAgent>,
}

impl CognitiveTracker {
    pub fn new(params: CognitionParams) -> Self {
        Self { params, tracked: BTreeMap::new() }
    }

    pub fn params(&self) -> &CognitionParams {
        &self.params
    }

    pub fn posterior(&self, id: usize) -> Option<&GaussianBelief> {
        self.tracked.get(&id).map(|t| &t.posterior)
    }

    /// Most recent uncertainty about `id`, 0 if never observed.
    pub fn uncertainty(&self, id: usize) -> f64 {
        self.tracked.get(&id).map_or(0.0, |t| t.uncertainty)
    }

    pub fn tracked_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.tracked.keys().copied()
    }

    fn observation(&self, velocity: Vec2) -> ObservationDistribution {
        GaussianBelief::isotropic(velocity, self.params.sigma_obs_sq)
    }

    fn prior_for(&self, id: usize, observed: Vec2, predictor: &dyn VelocityPredictor) -> GaussianBelief {
        match self.tracked.get(&id) {
            Some(t) => predict_with(predictor, &t.posterior, t.last_observed, self.params.process_noise_sq),
            None => GaussianBelief::isotropic(observed, self.params.sigma_init_sq),
        }
    }

    /// Runs one predict–observe–update cycle for every observed agent and
    /// returns the resulting uncertainties.
    pub fn step(&mut self, observed: &BTreeMap<usize, Vec2>) -> Result<BTreeMap<usize, f64>> {
        self.step_with(observed, &ConstantVelocity)
    }

    pub fn step_with(
        &mut self,
        observed: &BTreeMap<usize, Vec2>,
        predictor: &dyn VelocityPredictor,
    ) -> Result<BTreeMap<usize, f64>> {
        let mut updates = Vec::with_capacity(observed.len());
        for (&id, &velocity) in observed {
            if !velocity.is_finite() {
                return Err(SimError::Validation(format!("observed velocity of agent {id} is not finite")));
            }
            let prior = self.prior_for(id, velocity, predictor);
            let obs = self.observation(velocity);
            let uncertainty = kl_gaussian(&prior, &obs)?;
            let posterior = bayes_update(&prior, &obs)?;
            updates.push((id, TrackedAgent { posterior, last_observed: velocity, uncertainty }));
        }
        // Commit only after every agent succeeded.
        let mut out = BTreeMap::new();
        for (id, tracked) in updates {
            out.insert(id, tracked.uncertainty);
            self.tracked.insert(id, tracked);
        }
        Ok(out)
    }
}

/// Free-function form of [`CognitiveTracker::step`].
pub fn cognitive_step(tracker: &mut CognitiveTracker, observed: &BTreeMap<usize, Vec2>) -> Result<BTreeMap<usize, f64>> {
    tracker.step(observed)
}
