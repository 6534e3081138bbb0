//! Pedestrian behaviour models: constant velocity, the classic social force
//! model, and its risk-weighted variants (physical risk only, and physical
//! risk amplified by cognitive uncertainty).

use serde::{Deserialize, Serialize};

use crate::cognition::CognitiveTracker;
use crate::error::{Result, SimError};
use crate::risk::{fused_weight, goal_weight, pair_risk, RiskParams};
use crate::vec2::Vec2;
use crate::world::{relative_geometry, AgentState, WorldState};

/// Pedestrians closer than this to their goal stop moving and drop out of
/// the force computation.
pub const ARRIVAL_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SfmParams {
    /// Desired walking speed, m/s.
    pub v0: f64,
    /// Relaxation time, s.
    pub tau: f64,
    pub a_veh: f64,
    pub b_veh: f64,
    pub a_ped: f64,
    pub b_ped: f64,
}

impl Default for SfmParams {
    fn default() -> Self {
        Self { v0: 1.4, tau: 0.5, a_veh: 3.0, b_veh: 2.0, a_ped: 2.0, b_ped: 0.8 }
    }
}

impl SfmParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.v0, self.tau, self.a_veh, self.b_veh, self.a_ped, self.b_ped];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(SimError::Validation(format!("social force parameters must be positive, got {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PedestrianModelKind {
    #[serde(rename = "cv")]
    Cv,
    #[serde(rename = "sfm")]
    Sfm,
    #[serde(rename = "ra_sfm")]
    RaSfm,
    #[serde(rename = "cr_sfm")]
    CrSfm,
}

impl PedestrianModelKind {
    pub const ALL: [PedestrianModelKind; 4] = [Self::Cv, Self::Sfm, Self::RaSfm, Self::CrSfm];

    pub fn name(self) -> &'static str {
        match self {
            Self::Cv => "cv",
            Self::Sfm => "sfm",
            Self::RaSfm => "ra_sfm",
            Self::CrSfm => "cr_sfm",
        }
    }
}

impl std::str::FromStr for PedestrianModelKind {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| SimError::Validation(format!("unknown pedestrian model '{s}' (expected cv, sfm, ra_sfm, cr_sfm)")))
    }
}

impl std::fmt::Display for PedestrianModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub fn has_arrived(ped: &AgentState) -> bool {
    ped.distance_to_goal() < ARRIVAL_RADIUS
}

/// Relaxation toward the desired velocity along the goal direction.
pub fn goal_force(ped: &AgentState, params: &SfmParams) -> Vec2 {
    let to_goal = ped.goal - ped.position;
    let dist = to_goal.norm();
    if dist <= 0.0 {
        return Vec2::ZERO;
    }
    (to_goal / dist * params.v0 - ped.velocity()) / params.tau
}

fn exponential_repulsion(ped: &AgentState, source: &AgentState, strength: f64, range: f64) -> Vec2 {
    let geom = relative_geometry(ped, source);
    let contact = ped.radius + source.radius;
    geom.n_hat * (strength * ((contact - geom.d_actual) / range).exp())
}

/// Repulsion of a pedestrian away from the vehicle.
pub fn vehicle_repulsion(ped: &AgentState, av: &AgentState, params: &SfmParams) -> Vec2 {
    exponential_repulsion(ped, av, params.a_veh, params.b_veh)
}

/// Repulsion of pedestrian `i` away from pedestrian `j`.
pub fn pedestrian_repulsion(ped_i: &AgentState, ped_j: &AgentState, params: &SfmParams) -> Vec2 {
    exponential_repulsion(ped_i, ped_j, params.a_ped, params.b_ped)
}

/// Net force on `ped` from the rest of `world`.
///
/// `tracker` is the pedestrian's own cognitive state; only CR-SFM reads it.
pub fn total_force(
    kind: PedestrianModelKind,
    ped: &AgentState,
    world: &WorldState,
    tracker: &CognitiveTracker,
    sfm: &SfmParams,
    risk: &RiskParams,
) -> Vec2 {
    if kind == PedestrianModelKind::Cv || has_arrived(ped) {
        return Vec2::ZERO;
    }
    let goal = goal_force(ped, sfm);
    let others = world.agents.iter().filter(|o| o.id != ped.id && (o.is_av() || !has_arrived(o)));

    if kind == PedestrianModelKind::Sfm {
        return others.fold(goal, |acc, other| {
            acc + if other.is_av() { vehicle_repulsion(ped, other, sfm) } else { pedestrian_repulsion(ped, other, sfm) }
        });
    }

    // RA-SFM is CR-SFM with the uncertainty gains zeroed.
    let risk = if kind == PedestrianModelKind::RaSfm { risk.without_uncertainty() } else { *risk };
    let mut repulsion = Vec2::ZERO;
    let mut w_veh = 0.0;
    let mut w_peds = Vec::new();
    for other in others {
        let psi = pair_risk(ped, other, &risk);
        let u = tracker.uncertainty(other.id);
        if other.is_av() {
            w_veh = fused_weight(psi, u, risk.lambda1);
            repulsion += vehicle_repulsion(ped, other, sfm) * w_veh;
        } else {
            let w = fused_weight(psi, u, risk.lambda2);
            w_peds.push(w);
            repulsion += pedestrian_repulsion(ped, other, sfm) * w;
        }
    }
    goal * goal_weight(w_veh, &w_peds, &risk) + repulsion
}

/// Constant-velocity advance using the velocity recorded at episode start.
pub fn cv_step(ped: &AgentState, initial_velocity: Vec2, dt: f64) -> AgentState {
    let mut next = *ped;
    next.position = ped.position + initial_velocity * dt;
    next.speed = initial_velocity.norm();
    if next.speed > 0.0 {
        next.heading = crate::world::wrap_angle(initial_velocity.angle());
    }
    next.acceleration = 0.0;
    next
}
