//! Synchronous multi-agent stepping shared by the RL environment and the
//! pedestrian-model evaluation harness.
//!
//! Every agent keeps its own cognitive tracker over all other agents. The
//! tracker pass runs on the velocities of the current snapshot; pedestrian
//! forces are then computed from that same snapshot and integrated
//! together, so nobody reacts to a partially updated world.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cognition::{CognitionParams, CognitiveTracker};
use crate::error::{Result, SimError};
use crate::matrix::DenseMatrix;
use crate::pedestrians::{cv_step, has_arrived, total_force, PedestrianModelKind, SfmParams};
use crate::risk::RiskParams;
use crate::vec2::Vec2;
use crate::world::{step_av, step_pedestrian, wrap_angle, Action, AgentState, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub position: Vec2,
    pub velocity: Vec2,
}

/// Recorded positions (and velocities) at a fixed step, starting at t = 0.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn new(points: Vec<TrajectoryPoint>) -> Self {
        Self { points }
    }

    /// Builds a trajectory from positions only, differencing for velocity.
    pub fn from_positions(positions: &[Vec2], dt: f64) -> Self {
        let points = positions
            .iter()
            .enumerate()
            .map(|(t, &p)| {
                let velocity = match (positions.get(t + 1), t.checked_sub(1).map(|s| positions[s])) {
                    (Some(&next), _) => (next - p) / dt,
                    (None, Some(prev)) => (p - prev) / dt,
                    (None, None) => Vec2::ZERO,
                };
                TrajectoryPoint { position: p, velocity }
            })
            .collect();
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.points.iter().map(|p| p.position).collect()
    }

    /// Point at `step`; past the end the agent stands at its last position.
    pub fn at(&self, step: usize) -> TrajectoryPoint {
        match self.points.get(step) {
            Some(p) => *p,
            None => TrajectoryPoint { position: self.points.last().map_or(Vec2::ZERO, |p| p.position), velocity: Vec2::ZERO },
        }
    }
}

/// Who moves an agent.
#[derive(Debug, Clone, PartialEq)]
pub enum Control {
    /// The AV, stepped from an external action.
    Vehicle,
    /// A pedestrian moved by the configured behaviour model.
    Model,
    /// Replays a recorded trajectory verbatim.
    Ghost(Trajectory),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    #[serde(default)]
    pub sfm: SfmParams,
    #[serde(default)]
    pub risk: RiskParams,
    #[serde(default)]
    pub cognition: CognitionParams,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        self.sfm.validate()?;
        self.risk.validate()?;
        self.cognition.validate()
    }
}

#[derive(Debug, Clone)]
pub struct CrowdSim {
    world: WorldState,
    controls: Vec<Control>,
    model: PedestrianModelKind,
    params: ModelParams,
    trackers: Vec<CognitiveTracker>,
    uncertainty: DenseMatrix,
    initial_velocities: Vec<Vec2>,
    /// Per-agent standard deviation of additive force noise (m/s²).
    force_noise: Vec<f64>,
    rng: ChaCha8Rng,
    step_index: usize,
}

impl CrowdSim {
    pub fn new(
        world: WorldState,
        controls: Vec<Control>,
        model: PedestrianModelKind,
        params: ModelParams,
        force_noise: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        world.validate()?;
        params.validate()?;
        let n = world.len();
        if controls.len() != n || force_noise.len() != n {
            return Err(SimError::Validation(format!(
                "{n} agents but {} controls and {} noise entries",
                controls.len(),
                force_noise.len()
            )));
        }
        if force_noise.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(SimError::Validation("force noise must be finite and non-negative".into()));
        }
        for (i, c) in controls.iter().enumerate() {
            match c {
                Control::Vehicle if i != 0 => {
                    return Err(SimError::Validation(format!("agent {i}: only agent 0 can be vehicle-controlled")))
                }
                Control::Model if i == 0 => return Err(SimError::Validation("agent 0 is the AV, not a pedestrian".into())),
                Control::Ghost(t) if t.is_empty() => {
                    return Err(SimError::Validation(format!("agent {i}: ghost trajectory is empty")))
                }
                _ => {}
            }
        }
        let mut sim = Self {
            initial_velocities: world.agents.iter().map(AgentState::velocity).collect(),
            trackers: vec![CognitiveTracker::new(params.cognition); n],
            uncertainty: DenseMatrix::zeros(n, n),
            world,
            controls,
            model,
            params,
            force_noise,
            rng: ChaCha8Rng::seed_from_u64(seed),
            step_index: 0,
        };
        sim.sync_ghosts(0);
        sim.observe()?;
        Ok(sim)
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn model(&self) -> PedestrianModelKind {
        self.model
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    /// u(i, j): agent i's current uncertainty about agent j.
    pub fn uncertainties(&self) -> &DenseMatrix {
        &self.uncertainty
    }

    pub fn tracker(&self, agent: usize) -> &CognitiveTracker {
        &self.trackers[agent]
    }

    fn sync_ghosts(&mut self, step: usize) {
        let dt = self.world.dt;
        for (agent, control) in self.world.agents.iter_mut().zip(&self.controls) {
            if let Control::Ghost(traj) = control {
                let point = traj.at(step);
                let speed = point.velocity.norm();
                if step > 0 {
                    agent.acceleration = (speed - agent.speed) / dt;
                }
                agent.position = point.position;
                agent.speed = speed.min(agent.kind.max_speed());
                if speed > 0.0 {
                    agent.heading = wrap_angle(point.velocity.angle());
                }
            }
        }
    }

    /// Every agent observes every other agent's current velocity.
    fn observe(&mut self) -> Result<()> {
        let velocities: Vec<Vec2> = self.world.agents.iter().map(AgentState::velocity).collect();
        for (i, tracker) in self.trackers.iter_mut().enumerate() {
            let observed: BTreeMap<usize, Vec2> =
                velocities.iter().enumerate().filter(|(j, _)| *j != i).map(|(j, v)| (j, *v)).collect();
            for (j, u) in tracker.step(&observed)? {
                self.uncertainty[(i, j)] = u;
            }
        }
        Ok(())
    }

    /// Advances every agent by one step. `av_action` is required when agent
    /// 0 is vehicle-controlled and ignored otherwise.
    pub fn advance(&mut self, av_action: Option<Action>) -> Result<()> {
        let dt = self.world.dt;
        let snapshot = self.world.clone();
        let mut next = snapshot.agents.clone();
        for (i, control) in self.controls.iter().enumerate() {
            match control {
                Control::Vehicle => {
                    let action = av_action
                        .ok_or_else(|| SimError::Contract("vehicle-controlled AV requires an action".into()))?
                        .clamped();
                    next[i] = step_av(&snapshot.agents[i], action, dt)?;
                }
                Control::Model => {
                    let ped = &snapshot.agents[i];
                    next[i] = if has_arrived(ped) {
                        let mut frozen = *ped;
                        frozen.speed = 0.0;
                        frozen.acceleration = 0.0;
                        frozen
                    } else if self.model == PedestrianModelKind::Cv {
                        cv_step(ped, self.initial_velocities[i], dt)
                    } else {
                        let mut force =
                            total_force(self.model, ped, &snapshot, &self.trackers[i], &self.params.sfm, &self.params.risk);
                        let sigma = self.force_noise[i];
                        if sigma > 0.0 {
                            let normal = Normal::new(0.0, sigma).expect("validated noise scale");
                            force += Vec2::new(normal.sample(&mut self.rng), normal.sample(&mut self.rng));
                        }
                        step_pedestrian(ped, force, dt)?
                    };
                }
                Control::Ghost(_) => {}
            }
        }
        self.world.agents = next;
        self.step_index += 1;
        self.world.time = self.step_index as f64 * dt;
        self.sync_ghosts(self.step_index);
        self.observe()
    }
}
