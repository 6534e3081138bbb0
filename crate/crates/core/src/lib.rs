//! Simulation core: world kinematics, cognitive uncertainty tracking,
//! physical/cognitive risk, pedestrian behaviour models, the navigation
//! environment and evaluation metrics.

pub mod cognition;
pub mod env;
pub mod error;
pub mod log;
pub mod matrix;
pub mod metrics;
pub mod pedestrians;
pub mod replay;
pub mod risk;
pub mod sim;
pub mod vec2;
pub mod world;

pub use cognition::{CognitionParams, CognitiveTracker, GaussianBelief};
pub use env::{Env, EnvConfig, Observation, RewardParams, Scenario, StepResult};
pub use error::{Result, SimError};
pub use log::{EpisodeLog, Outcome};
pub use matrix::DenseMatrix;
pub use metrics::MetricsReport;
pub use pedestrians::{PedestrianModelKind, SfmParams};
pub use replay::run_replay;
pub use risk::{InteractionGraph, RiskParams};
pub use sim::{Control, CrowdSim, ModelParams, Trajectory, TrajectoryPoint};
pub use vec2::Vec2;
pub use world::{Action, AgentKind, AgentState, WorldState};
