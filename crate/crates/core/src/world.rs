//! Ground-truth world state and discrete-time kinematics.
//!
//! Agent 0 is always the autonomous vehicle; pedestrians follow with
//! contiguous ids. Both agent kinds integrate with semi-implicit Euler:
//! speed/velocity first, then position from the updated velocity.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Result, SimError};
use crate::vec2::Vec2;

/// Fixed simulation step in seconds.
pub const DT: f64 = 0.5;
pub const AV_MAX_SPEED: f64 = 6.0;
pub const PED_MAX_SPEED: f64 = 2.0;
pub const AV_MAX_ACCEL: f64 = 2.0;
/// Largest heading change the AV can command in one step (radians).
pub const AV_MAX_DHEADING: f64 = 0.2;
pub const AV_RADIUS: f64 = 1.0;
pub const PED_RADIUS: f64 = 0.3;

/// Below this center distance two agents are treated as coincident.
const DEGENERATE_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Av,
    Pedestrian,
}

impl AgentKind {
    pub fn max_speed(self) -> f64 {
        match self {
            AgentKind::Av => AV_MAX_SPEED,
            AgentKind::Pedestrian => PED_MAX_SPEED,
        }
    }

    pub fn default_radius(self) -> f64 {
        match self {
            AgentKind::Av => AV_RADIUS,
            AgentKind::Pedestrian => PED_RADIUS,
        }
    }
}

/// Maps any angle onto (-π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: usize,
    pub kind: AgentKind,
    pub position: Vec2,
    /// Radians in (-π, π].
    pub heading: f64,
    /// Non-negative scalar speed; velocity is `speed` along `heading`.
    pub speed: f64,
    /// Scalar (longitudinal) acceleration in m/s².
    pub acceleration: f64,
    pub radius: f64,
    pub goal: Vec2,
}

impl AgentState {
    pub fn new(id: usize, kind: AgentKind, position: Vec2, velocity: Vec2, goal: Vec2) -> Self {
        let speed = velocity.norm();
        let heading = if speed > 0.0 {
            wrap_angle(velocity.angle())
        } else {
            wrap_angle((goal - position).angle())
        };
        Self {
            id,
            kind,
            position,
            heading,
            speed,
            acceleration: 0.0,
            radius: kind.default_radius(),
            goal,
        }
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::from_polar(self.speed, self.heading)
    }

    pub fn is_av(&self) -> bool {
        self.kind == AgentKind::Av
    }

    pub fn distance_to_goal(&self) -> f64 {
        self.position.distance(self.goal)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite(
            "agent state",
            &[
                self.position.x,
                self.position.y,
                self.heading,
                self.speed,
                self.acceleration,
                self.radius,
                self.goal.x,
                self.goal.y,
            ],
        )?;
        if self.radius <= 0.0 {
            return Err(SimError::Validation(format!("agent {} radius must be positive", self.id)));
        }
        if self.speed < 0.0 || self.speed > self.kind.max_speed() + 1e-9 {
            return Err(SimError::Validation(format!(
                "agent {} speed {} outside [0, {}]",
                self.id,
                self.speed,
                self.kind.max_speed()
            )));
        }
        Ok(())
    }
}

/// AV control: longitudinal acceleration and per-step heading change.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    pub accel: f64,
    pub dheading: f64,
}

impl Action {
    pub fn new(accel: f64, dheading: f64) -> Self {
        Self { accel, dheading }
    }

    pub fn clamped(self) -> Self {
        Self {
            accel: self.accel.clamp(-AV_MAX_ACCEL, AV_MAX_ACCEL),
            dheading: self.dheading.clamp(-AV_MAX_DHEADING, AV_MAX_DHEADING),
        }
    }

    /// Maps a unit-box action in [-1, 1]² onto the AV's physical bounds.
    pub fn from_unit(unit: [f64; 2]) -> Self {
        Self::new(unit[0] * AV_MAX_ACCEL, unit[1] * AV_MAX_DHEADING).clamped()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub time: f64,
    pub dt: f64,
    pub agents: Vec<AgentState>,
}

impl WorldState {
    pub fn new(agents: Vec<AgentState>, dt: f64) -> Result<Self> {
        let world = Self { time: 0.0, dt, agents };
        world.validate()?;
        Ok(world)
    }

    pub fn av(&self) -> &AgentState {
        &self.agents[0]
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SimError::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        if self.agents.is_empty() {
            return Err(SimError::Validation("world has no agents".into()));
        }
        for (index, agent) in self.agents.iter().enumerate() {
            if agent.id != index {
                return Err(SimError::Validation(format!(
                    "agent ids must be contiguous from 0; slot {index} holds id {}",
                    agent.id
                )));
            }
            if (index == 0) != agent.is_av() {
                return Err(SimError::Validation("agent 0 must be the AV and only agent 0".into()));
            }
            agent.validate()?;
        }
        Ok(())
    }
}

/// Advances the AV by one step of unicycle kinematics.
pub fn step_av(state: &AgentState, action: Action, dt: f64) -> Result<AgentState> {
    ensure_finite("AV step input", &[action.accel, action.dheading, dt])?;
    state.validate()?;
    let heading = wrap_angle(state.heading + action.dheading);
    let speed = (state.speed + action.accel * dt).clamp(0.0, AV_MAX_SPEED);
    let mut next = *state;
    next.heading = heading;
    next.speed = speed;
    next.position = state.position + Vec2::from_polar(speed, heading) * dt;
    next.acceleration = action.accel;
    Ok(next)
}

/// Advances a pedestrian under a net force (per unit mass).
///
/// The scalar `acceleration` field records the change in speed over the step.
pub fn step_pedestrian(state: &AgentState, force: Vec2, dt: f64) -> Result<AgentState> {
    ensure_finite("pedestrian force", &[force.x, force.y, dt])?;
    state.validate()?;
    let velocity = (state.velocity() + force * dt).clamp_norm(PED_MAX_SPEED);
    let mut next = *state;
    next.speed = velocity.norm().min(PED_MAX_SPEED);
    if next.speed > 0.0 {
        next.heading = wrap_angle(velocity.angle());
    }
    next.position = state.position + velocity * dt;
    next.acceleration = (next.speed - state.speed) / dt;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeGeometry {
    /// Center-to-center distance.
    pub d_actual: f64,
    /// Angle between the other agent's velocity and the vector from the
    /// other agent to the ego agent.
    pub phi: f64,
    /// Unit vector from the other agent toward the ego agent.
    pub n_hat: Vec2,
    /// d/dt of the center distance; negative when approaching.
    pub closing_rate: f64,
    /// Set when the centers coincide and `n_hat` is the (1, 0) fallback.
    pub degenerate: bool,
}

pub fn relative_geometry(ego: &AgentState, other: &AgentState) -> RelativeGeometry {
    let offset = ego.position - other.position;
    let d_actual = offset.norm();
    let degenerate = d_actual < DEGENERATE_DISTANCE;
    let n_hat = if degenerate { Vec2::new(1.0, 0.0) } else { offset / d_actual };
    let other_velocity = other.velocity();
    let phi = other_velocity.cross(n_hat).atan2(other_velocity.dot(n_hat));
    let closing_rate = n_hat.dot(ego.velocity() - other_velocity);
    RelativeGeometry { d_actual, phi, n_hat, closing_rate, degenerate }
}

/// First overlapping pair `(i, j)`, `i < j`, scanning in index order.
pub fn detect_collision(world: &WorldState) -> Option<(usize, usize)> {
    colliding_pairs(world).next()
}

pub fn all_collisions(world: &WorldState) -> Vec<(usize, usize)> {
    colliding_pairs(world).collect()
}

fn colliding_pairs(world: &WorldState) -> impl Iterator<Item = (usize, usize)> + '_ {
    let agents = &world.agents;
    (0..agents.len()).flat_map(move |i| {
        (i + 1..agents.len()).filter_map(move |j| {
            let (a, b) = (&agents[i], &agents[j]);
            (a.position.distance(b.position) < a.radius + b.radius).then_some((i, j))
        })
    })
}
