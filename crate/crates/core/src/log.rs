use serde::{Deserialize, Serialize};

use crate::pedestrians::PedestrianModelKind;
use crate::vec2::Vec2;
use crate::world::{Action, AgentKind, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Running,
    Success,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn is_terminal(self) -> bool {
        self != Outcome::Running
    }

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Running => "running",
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub accel: f64,
}

impl AgentSnapshot {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub agents: Vec<AgentSnapshot>,
    /// Action applied to reach this state; absent on the initial record.
    pub action: Option<Action>,
    pub reward: Option<f64>,
    /// Row-major u(i, j) over all agents.
    pub uncertainties: Vec<Vec<f64>>,
    /// Overlapping pairs `(i, j)`, `i < j`, in this state.
    pub collisions: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentInfo {
    pub id: usize,
    pub kind: AgentKind,
    pub radius: f64,
    pub goal: Vec2,
    /// False for replayed (ghost) and vehicle agents.
    pub simulated: bool,
}

/// Full per-step record of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub scenario_id: String,
    pub seed: u64,
    pub model: PedestrianModelKind,
    pub dt: f64,
    pub agents: Vec<AgentInfo>,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
}

impl EpisodeLog {
    pub fn new(scenario_id: impl Into<String>, seed: u64, model: PedestrianModelKind, dt: f64, agents: Vec<AgentInfo>) -> Self {
        Self { scenario_id: scenario_id.into(), seed, model, dt, agents, steps: Vec::new(), outcome: Outcome::Running }
    }

    pub fn push_state(
        &mut self,
        world: &WorldState,
        action: Option<Action>,
        reward: Option<f64>,
        uncertainties: Vec<Vec<f64>>,
        collisions: Vec<(usize, usize)>,
    ) {
        let agents = world
            .agents
            .iter()
            .map(|a| AgentSnapshot { x: a.position.x, y: a.position.y, heading: a.heading, speed: a.speed, accel: a.acceleration })
            .collect();
        self.steps.push(StepRecord { step: self.steps.len(), time: world.time, agents, action, reward, uncertainties, collisions });
    }

    /// Positions of one agent over the episode.
    pub fn trajectory(&self, agent: usize) -> Vec<Vec2> {
        self.steps.iter().map(|s| s.agents[agent].position()).collect()
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().filter_map(|s| s.reward).sum()
    }

    pub fn any_collision_involving(&self, agent: usize) -> bool {
        self.steps.iter().any(|s| s.collisions.iter().any(|&(i, j)| i == agent || j == agent))
    }

    pub fn simulated_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.agents.iter().filter(|a| a.simulated).map(|a| a.id)
    }
}
