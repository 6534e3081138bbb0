//! Physical risk from motion-modulated ("virtual") distance, its fusion with
//! cognitive uncertainty, and the risk-encoded interaction graph.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::matrix::DenseMatrix;
use crate::world::{relative_geometry, AgentState, RelativeGeometry, WorldState, AV_MAX_ACCEL, AV_MAX_SPEED};

/// Width of a node feature row.
pub const NODE_FEATURES: usize = 9;
pub const POSITION_SCALE: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RiskParams {
    /// Motion sensitivity inside the tanh.
    pub gamma1: f64,
    /// Distance decay of physical risk, 1/m.
    pub gamma2: f64,
    /// Uncertainty gain on vehicle repulsion.
    pub lambda1: f64,
    /// Uncertainty gain on pedestrian repulsion.
    pub lambda2: f64,
    /// Goal-force decay rate.
    pub lambda3: f64,
    /// Uncertainty gain on adjacency entries.
    pub lambda_adj: f64,
}

impl Default for RiskParams {
    fn default() -> Self {
        Self { gamma1: 0.4, gamma2: 0.5, lambda1: 1.0, lambda2: 1.0, lambda3: 1.5, lambda_adj: 1.0 }
    }
}

impl RiskParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.gamma1, self.gamma2];
        let non_negative = [self.lambda1, self.lambda2, self.lambda3, self.lambda_adj];
        if positive.iter().all(|v| v.is_finite() && *v > 0.0) && non_negative.iter().all(|v| v.is_finite() && *v >= 0.0) {
            Ok(())
        } else {
            Err(SimError::Validation(format!("invalid risk parameters {self:?}")))
        }
    }

    /// The same parameters with every uncertainty gain switched off.
    pub fn without_uncertainty(self) -> Self {
        Self { lambda1: 0.0, lambda2: 0.0, lambda_adj: 0.0, ..self }
    }
}

/// Actual distance stretched when the other agent recedes and shrunk when it
/// approaches, by its speed along the line of sight plus its acceleration.
pub fn virtual_distance(geom: &RelativeGeometry, other_speed: f64, other_accel_mag: f64, params: &RiskParams) -> f64 {
    // A tangential pass (closing rate exactly 0) counts as receding.
    let k = if geom.closing_rate >= 0.0 { 1.0 } else { -1.0 };
    let motion = other_speed * geom.phi.cos().abs() + other_accel_mag.abs();
    geom.d_actual * (1.0 + (params.gamma1 * k * motion).tanh())
}

pub fn physical_risk(d_virtual: f64, params: &RiskParams) -> f64 {
    1.0 / (1.0 + params.gamma2 * d_virtual.max(0.0))
}

pub fn fused_weight(psi: f64, u: f64, lambda: f64) -> f64 {
    psi * (1.0 + lambda * u)
}

/// Goal-force weight: exponential decay in the largest interaction weight.
pub fn goal_weight(w_veh: f64, w_peds: &[f64], params: &RiskParams) -> f64 {
    let max_w = w_peds.iter().copied().fold(w_veh, f64::max);
    (-params.lambda3 * max_w).exp()
}

/// Physical risk that `other` poses to `ego`.
pub fn pair_risk(ego: &AgentState, other: &AgentState, params: &RiskParams) -> f64 {
    let geom = relative_geometry(ego, other);
    physical_risk(virtual_distance(&geom, other.speed, other.acceleration.abs(), params), params)
}

/// Node features, adjacency A and the normalized D̃^{-1/2}(A + I)D̃^{-1/2}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    pub node_features: DenseMatrix,
    pub adjacency: DenseMatrix,
    pub normalized: DenseMatrix,
}

impl InteractionGraph {
    pub fn new(node_features: DenseMatrix, adjacency: DenseMatrix) -> Result<Self> {
        if adjacency.rows() != adjacency.cols() || adjacency.rows() != node_features.rows() {
            return Err(SimError::Validation(format!(
                "adjacency {}x{} does not match {} nodes",
                adjacency.rows(),
                adjacency.cols(),
                node_features.rows()
            )));
        }
        let normalized = normalize_adjacency(&adjacency)?;
        Ok(Self { node_features, adjacency, normalized })
    }

    pub fn nodes(&self) -> usize {
        self.node_features.rows()
    }
}

/// Symmetric degree normalization of A + I using row sums of A + I.
pub fn normalize_adjacency(adjacency: &DenseMatrix) -> Result<DenseMatrix> {
    let n = adjacency.rows();
    if adjacency.cols() != n {
        return Err(SimError::Validation("adjacency must be square".into()));
    }
    if adjacency.data().iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(SimError::Validation("adjacency entries must be finite and non-negative".into()));
    }
    let mut tilde = adjacency.clone();
    for i in 0..n {
        tilde[(i, i)] += 1.0;
    }
    let inv_sqrt_degree: Vec<f64> = (0..n).map(|i| 1.0 / tilde.row(i).iter().sum::<f64>().sqrt()).collect();
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = inv_sqrt_degree[i] * tilde[(i, j)] * inv_sqrt_degree[j];
        }
    }
    Ok(out)
}

/// Per-agent feature rows in the AV-goal-centered frame.
///
/// Row layout: `[x, y, cos θ, sin θ, speed, accel, goal_dx, goal_dy, is_av]`,
/// positions over 30 m, speeds over 6 m/s, acceleration over 2 m/s².
pub fn node_features(world: &WorldState) -> DenseMatrix {
    let origin = world.av().goal;
    let mut m = DenseMatrix::zeros(world.len(), NODE_FEATURES);
    for (i, agent) in world.agents.iter().enumerate() {
        let rel = (agent.position - origin) / POSITION_SCALE;
        let to_goal = (agent.goal - agent.position) / POSITION_SCALE;
        let accel = if agent.is_av() { agent.acceleration / AV_MAX_ACCEL } else { 0.0 };
        let row = [
            rel.x,
            rel.y,
            agent.heading.cos(),
            agent.heading.sin(),
            agent.speed / AV_MAX_SPEED,
            accel,
            to_goal.x,
            to_goal.y,
            if agent.is_av() { 1.0 } else { 0.0 },
        ];
        for (k, v) in row.into_iter().enumerate() {
            m[(i, k)] = v;
        }
    }
    m
}

/// Risk-encoded adjacency: `A(i, j) = ψ(i, j)·(1 + λ_adj·u(i, j))` where
/// ψ(i, j) is the risk agent j poses to agent i and u(i, j) is i's
/// uncertainty about j.
pub fn build_adjacency(world: &WorldState, uncertainties: &DenseMatrix, params: &RiskParams) -> Result<InteractionGraph> {
    let n = world.len();
    if uncertainties.rows() != n || uncertainties.cols() != n {
        return Err(SimError::Validation(format!(
            "uncertainty matrix is {}x{}, world has {n} agents",
            uncertainties.rows(),
            uncertainties.cols()
        )));
    }
    let mut adjacency = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let psi = pair_risk(&world.agents[i], &world.agents[j], params);
                adjacency[(i, j)] = fused_weight(psi, uncertainties[(i, j)], params.lambda_adj);
            }
        }
    }
    InteractionGraph::new(node_features(world), adjacency)
}

/// Graph with uniform unit weights between every pair of distinct agents.
pub fn uniform_adjacency(n: usize) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                a[(i, j)] = 1.0;
            }
        }
    }
    a
}
