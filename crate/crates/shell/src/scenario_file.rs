//! JSON scenario documents.

use std::path::{Path, PathBuf};

use cogrisk_core::world::wrap_angle;
use cogrisk_core::{AgentKind, AgentState, PedestrianModelKind, Scenario, Trajectory, TrajectoryPoint, Vec2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub id: String,
    pub dt: f64,
    pub model: PedestrianModelKind,
    pub max_steps: usize,
    pub seed: u64,
    pub agents: Vec<AgentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: usize,
    pub kind: AgentKind,
    pub x: f64,
    pub y: f64,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
    pub speed: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub accel: f64,
    pub radius: f64,
    pub goal: [f64; 2],
    /// Recorded states `[x, y, vx, vy]` at every step from t = 0. A
    /// pedestrian with a trajectory is replayed instead of simulated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<[f64; 4]>>,
    /// Standard deviation of the random force added each step, m/s².
    #[serde(default, skip_serializing_if = "is_zero")]
    pub behavior_noise: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl ScenarioFile {
    pub fn from_scenario(s: &Scenario) -> Self {
        let agents = s
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| AgentSpec {
                id: a.id,
                kind: a.kind,
                x: a.position.x,
                y: a.position.y,
                heading: a.heading,
                speed: a.speed,
                accel: a.acceleration,
                radius: a.radius,
                goal: [a.goal.x, a.goal.y],
                trajectory: s.replay[i].as_ref().map(|t| {
                    t.points.iter().map(|p| [p.position.x, p.position.y, p.velocity.x, p.velocity.y]).collect()
                }),
                behavior_noise: s.force_noise[i],
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            id: s.id.clone(),
            dt: s.dt,
            model: s.model,
            max_steps: s.max_steps,
            seed: s.seed,
            agents,
        }
    }

    /// Validates the document and converts it to a runnable scenario.
    pub fn to_scenario(&self) -> Result<Scenario> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ShellError::Validation(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ShellError::Validation(format!("dt must be positive, got {}", self.dt)));
        }
        if self.agents.is_empty() {
            return Err(ShellError::Validation("scenario has no agents".into()));
        }
        let mut agents = Vec::with_capacity(self.agents.len());
        let mut replay = Vec::with_capacity(self.agents.len());
        let mut noise = Vec::with_capacity(self.agents.len());
        for (i, spec) in self.agents.iter().enumerate() {
            if spec.id != i {
                return Err(ShellError::Validation(format!("agent at position {i} has id {}; ids must be 0, 1, 2, ...", spec.id)));
            }
            let expected = if i == 0 { AgentKind::Av } else { AgentKind::Pedestrian };
            if spec.kind != expected {
                return Err(ShellError::Validation(format!("agent {i} must be of kind {expected:?}, got {:?}", spec.kind)));
            }
            if !(spec.behavior_noise.is_finite() && spec.behavior_noise >= 0.0) {
                return Err(ShellError::Validation(format!("agent {i}: behavior_noise must be non-negative")));
            }
            let agent = AgentState {
                id: spec.id,
                kind: spec.kind,
                position: Vec2::new(spec.x, spec.y),
                heading: spec.heading,
                speed: spec.speed,
                acceleration: spec.accel,
                radius: spec.radius,
                goal: Vec2::new(spec.goal[0], spec.goal[1]),
            };
            agent.validate()?;
            let trajectory = match &spec.trajectory {
                None => None,
                Some(points) if points.is_empty() => {
                    return Err(ShellError::Validation(format!("agent {i}: trajectory is empty")));
                }
                Some(points) => {
                    if points.iter().flatten().any(|v| !v.is_finite()) {
                        return Err(ShellError::Validation(format!("agent {i}: trajectory contains non-finite values")));
                    }
                    Some(Trajectory::new(
                        points
                            .iter()
                            .map(|p| TrajectoryPoint { position: Vec2::new(p[0], p[1]), velocity: Vec2::new(p[2], p[3]) })
                            .collect(),
                    ))
                }
            };
            agents.push(agent);
            replay.push(trajectory);
            noise.push(spec.behavior_noise);
        }
        let scenario = Scenario {
            id: self.id.clone(),
            dt: self.dt,
            agents,
            model: self.model,
            max_steps: self.max_steps,
            seed: self.seed,
            replay,
            force_noise: noise,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes") + "\n"
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario> {
    let file = ScenarioFile::from_json(text).map_err(|e| ShellError::parse(origin, e.to_string()))?;
    file.to_scenario().map_err(|e| match e {
        ShellError::Validation(m) => ShellError::Validation(format!("{origin}: {m}")),
        other => other,
    })
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| ShellError::io(path, e))?;
    parse_scenario(&text, &path.display().to_string())
}

pub fn write_scenario(path: &Path, scenario: &Scenario) -> Result<()> {
    crate::io::write_file(path, ScenarioFile::from_scenario(scenario).to_json().as_bytes())
}

/// Reads one scenario file, or every `*.json` file of a directory in name order.
pub fn read_scenario_set(path: &Path) -> Result<Vec<Scenario>> {
    scenario_paths(path)?.iter().map(|p| read_scenario(p)).collect()
}

pub fn scenario_paths(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| ShellError::io(path, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json") && p.is_file())
            .collect();
        paths.sort();
        Ok(paths)
    } else if path.is_file() {
        Ok(vec![path.to_path_buf()])
    } else {
        Err(ShellError::Validation(format!("{}: no such file or directory", path.display())))
    }
}

/// Heading of a velocity, or 0 for a standing agent.
pub fn heading_of(v: Vec2) -> f64 {
    if v.norm() > 0.0 {
        wrap_angle(v.angle())
    } else {
        0.0
    }
}
