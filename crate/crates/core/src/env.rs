//! Episodic navigation environment: the AV is driven by external actions
//! while pedestrians follow the configured behaviour model.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::log::{AgentInfo, EpisodeLog, Outcome};
use crate::matrix::DenseMatrix;
use crate::pedestrians::PedestrianModelKind;
use crate::risk::{build_adjacency, InteractionGraph};
use crate::sim::{Control, CrowdSim, ModelParams, Trajectory};
use crate::world::{all_collisions, wrap_angle, Action, AgentKind, AgentState, WorldState, DT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub dt: f64,
    /// AV first, then pedestrians; each carries its own goal.
    pub agents: Vec<AgentState>,
    pub model: PedestrianModelKind,
    pub max_steps: usize,
    pub seed: u64,
    /// Recorded trajectory per agent; pedestrians with one are replayed.
    pub replay: Vec<Option<Trajectory>>,
    /// Per-agent standard deviation of force noise, m/s².
    pub force_noise: Vec<f64>,
}

impl Scenario {
    pub fn new(id: impl Into<String>, agents: Vec<AgentState>, model: PedestrianModelKind, max_steps: usize, seed: u64) -> Self {
        let n = agents.len();
        Self { id: id.into(), dt: DT, agents, model, max_steps, seed, replay: vec![None; n], force_noise: vec![0.0; n] }
    }

    pub fn av_goal(&self) -> crate::vec2::Vec2 {
        self.agents[0].goal
    }

    pub fn pedestrian_count(&self) -> usize {
        self.agents.len().saturating_sub(1)
    }

    pub fn initial_world(&self) -> Result<WorldState> {
        WorldState::new(self.agents.clone(), self.dt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(SimError::Validation("max_steps must be positive".into()));
        }
        let n = self.agents.len();
        if self.replay.len() != n || self.force_noise.len() != n {
            return Err(SimError::Validation("replay and force_noise must have one entry per agent".into()));
        }
        self.initial_world().map(|_| ())
    }

    /// Controls for the environment: AV external, pedestrians modelled unless replayed.
    pub fn controls(&self, av_replay: bool) -> Vec<Control> {
        self.replay
            .iter()
            .enumerate()
            .map(|(i, r)| match (i, r) {
                (0, Some(t)) if av_replay => Control::Ghost(t.clone()),
                (0, _) => Control::Vehicle,
                (_, Some(t)) => Control::Ghost(t.clone()),
                (_, None) => Control::Model,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardParams {
    /// Reward per meter of progress toward the goal.
    pub w_progress: f64,
    pub r_success: f64,
    pub r_collision: f64,
    /// Per-step time penalty.
    pub w_step: f64,
    /// Penalty per unit jerk, s³/m.
    pub w_jerk: f64,
    /// Reserved; must stay 0.
    pub w_speed_over: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self { w_progress: 1.0, r_success: 10.0, r_collision: -20.0, w_step: 0.05, w_jerk: 0.05, w_speed_over: 0.0 }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_collision < 0.0 && 0.0 < self.r_success) {
            return Err(SimError::Validation("reward requires r_collision < 0 < r_success".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    #[serde(default)]
    pub reward: RewardParams,
    pub goal_radius: f64,
    #[serde(default)]
    pub model: ModelParams,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self { reward: RewardParams::default(), goal_radius: 2.0, model: ModelParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub graph: InteractionGraph,
    /// `[d_goal (m), Δθ_goal (rad)]` of the AV.
    pub av_extras: [f64; 2],
    /// u(i, j) snapshot used for the adjacency.
    pub uncertainties: DenseMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub outcome: Outcome,
}

pub fn av_extras(av: &AgentState) -> [f64; 2] {
    let to_goal = av.goal - av.position;
    [to_goal.norm(), wrap_angle(to_goal.angle() - av.heading)]
}

pub fn reward(prev: &WorldState, action: Action, next: &WorldState, outcome: Outcome, params: &RewardParams) -> f64 {
    let progress = prev.av().distance_to_goal() - next.av().distance_to_goal();
    let jerk = (action.accel - prev.av().acceleration).abs() / next.dt;
    let terminal = match outcome {
        Outcome::Success => params.r_success,
        Outcome::Collision => params.r_collision,
        _ => 0.0,
    };
    params.w_progress * progress - params.w_step - params.w_jerk * jerk + terminal
}

/// Collision beats success beats timeout.
pub fn check_termination(world: &WorldState, step_index: usize, max_steps: usize, goal_radius: f64) -> Outcome {
    if all_collisions(world).iter().any(|&(i, j)| i == 0 || j == 0) {
        Outcome::Collision
    } else if world.av().distance_to_goal() < goal_radius {
        Outcome::Success
    } else if step_index >= max_steps {
        Outcome::Timeout
    } else {
        Outcome::Running
    }
}

#[derive(Debug, Clone)]
pub struct Env {
    config: EnvConfig,
    scenario: Option<Scenario>,
    sim: Option<CrowdSim>,
    outcome: Outcome,
    log: Option<EpisodeLog>,
}

impl Env {
    pub fn new(config: EnvConfig) -> Self {
        Self { config, scenario: None, sim: None, outcome: Outcome::Running, log: None }
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn reset(&mut self, scenario: &Scenario) -> Result<Observation> {
        scenario.validate()?;
        self.config.reward.validate()?;
        let world = scenario.initial_world()?;
        let sim = CrowdSim::new(
            world,
            scenario.controls(false),
            scenario.model,
            self.config.model,
            scenario.force_noise.clone(),
            scenario.seed,
        )?;
        let infos = sim
            .world()
            .agents
            .iter()
            .zip(sim.controls())
            .map(|(a, c)| AgentInfo {
                id: a.id,
                kind: a.kind,
                radius: a.radius,
                goal: a.goal,
                simulated: a.kind == AgentKind::Pedestrian && matches!(c, Control::Model),
            })
            .collect();
        let mut log = EpisodeLog::new(scenario.id.clone(), scenario.seed, scenario.model, scenario.dt, infos);
        log.push_state(sim.world(), None, None, matrix_rows(sim.uncertainties()), all_collisions(sim.world()));
        self.scenario = Some(scenario.clone());
        self.sim = Some(sim);
        self.log = Some(log);
        self.outcome = Outcome::Running;
        self.observation()
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.outcome.is_terminal() {
            return Err(SimError::Contract("episode already finished; call reset".into()));
        }
        let (sim, scenario) = match (self.sim.as_mut(), self.scenario.as_ref()) {
            (Some(sim), Some(scenario)) => (sim, scenario),
            _ => return Err(SimError::Contract("step called before reset".into())),
        };
        let action = action.clamped();
        let prev = sim.world().clone();
        sim.advance(Some(action))?;
        let outcome = check_termination(sim.world(), sim.step_index(), scenario.max_steps, self.config.goal_radius);
        let r = reward(&prev, action, sim.world(), outcome, &self.config.reward);
        let collisions = all_collisions(sim.world());
        let uncertainties = matrix_rows(sim.uncertainties());
        let log = self.log.as_mut().expect("log exists after reset");
        log.push_state(sim.world(), Some(action), Some(r), uncertainties, collisions);
        log.outcome = outcome;
        self.outcome = outcome;
        Ok(StepResult { observation: self.observation()?, reward: r, done: outcome.is_terminal(), outcome })
    }

    pub fn observation(&self) -> Result<Observation> {
        let sim = self.sim.as_ref().ok_or_else(|| SimError::Contract("no active episode".into()))?;
        let graph = build_adjacency(sim.world(), sim.uncertainties(), &self.config.model.risk)?;
        Ok(Observation { graph, av_extras: av_extras(sim.world().av()), uncertainties: sim.uncertainties().clone() })
    }

    pub fn world(&self) -> Option<&WorldState> {
        self.sim.as_ref().map(CrowdSim::world)
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn log(&self) -> Option<&EpisodeLog> {
        self.log.as_ref()
    }

    pub fn take_log(&mut self) -> Option<EpisodeLog> {
        self.log.take()
    }
}

fn matrix_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}
