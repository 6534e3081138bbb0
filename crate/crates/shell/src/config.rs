//! The toolkit configuration file (TOML). Every section and field is
//! optional; omitted values take their defaults. Command-line flags override
//! the file.

use std::collections::BTreeMap;
use std::path::Path;

use cogrisk_core::{EnvConfig, PedestrianModelKind};
use cogrisk_sac::SacConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};
use crate::generate::GenerateConfig;
use crate::render::RenderOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToolkitConfig {
    /// Master seed for every random stream.
    pub seed: u64,
    pub env: EnvConfig,
    pub sac: SacConfig,
    pub generate: GenerateConfig,
    pub simulate: SimulateConfig,
    pub calibrate: CalibrateConfig,
    pub render: RenderOptions,
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            env: EnvConfig::default(),
            sac: SacConfig::default(),
            generate: GenerateConfig::default(),
            simulate: SimulateConfig::default(),
            calibrate: CalibrateConfig::default(),
            render: RenderOptions::default(),
        }
    }
}

/// How the AV is driven when no checkpoint is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    /// Replay the scenario's recorded AV trajectory.
    Replay,
    /// Steer at the goal and hold the cruise speed.
    GoalSeeker,
    /// Uniformly random actions.
    Random,
    /// A trained actor loaded from a checkpoint.
    Checkpoint,
}

impl std::str::FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "replay" => Ok(PolicyKind::Replay),
            "goal-seeker" => Ok(PolicyKind::GoalSeeker),
            "random" => Ok(PolicyKind::Random),
            "checkpoint" => Ok(PolicyKind::Checkpoint),
            other => Err(format!("unknown policy '{other}' (replay, goal-seeker, random, checkpoint)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub policy: PolicyKind,
    /// Cruise speed of the goal-seeking driver, m/s.
    pub cruise_speed: f64,
    /// Overrides the pedestrian model named in the scenario.
    pub model: Option<PedestrianModelKind>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { policy: PolicyKind::GoalSeeker, cruise_speed: 4.0, model: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrateConfig {
    pub budget: usize,
    /// Default search boxes, used when the calibration spec names none.
    pub parameters: BTreeMap<String, [f64; 2]>,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        let parameters = [
            ("v0", [0.8, 2.0]),
            ("tau", [0.2, 1.5]),
            ("a_veh", [0.5, 6.0]),
            ("b_veh", [0.5, 4.0]),
            ("a_ped", [0.5, 4.0]),
            ("b_ped", [0.2, 2.0]),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self { budget: 200, parameters }
    }
}

impl ToolkitConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| ShellError::parse(origin, e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => ShellError::Validation(format!("{}: config file not found", path.display())),
            _ => ShellError::io(path, e),
        })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.env.model.validate()?;
        self.env.reward.validate()?;
        if !(self.env.goal_radius.is_finite() && self.env.goal_radius > 0.0) {
            return Err(ShellError::Validation("env.goal_radius must be positive".into()));
        }
        self.sac.validate()?;
        self.generate.validate()?;
        if !(self.simulate.cruise_speed.is_finite() && self.simulate.cruise_speed >= 0.0) {
            return Err(ShellError::Validation("simulate.cruise_speed must be non-negative".into()));
        }
        if self.calibrate.budget == 0 {
            return Err(ShellError::Validation("calibrate.budget must be at least 1".into()));
        }
        let r = &self.render;
        if ![r.width, r.height, r.panel_height].iter().all(|v| v.is_finite() && *v > 0.0) || !(r.margin.is_finite() && r.margin >= 0.0) {
            return Err(ShellError::Validation("render sizes must be positive".into()));
        }
        Ok(())
    }
}
