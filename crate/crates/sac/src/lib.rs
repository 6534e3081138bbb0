//! Soft actor-critic with twin critics and target networks, trained on the
//! navigation environment with graph-encoded observations.

pub mod agent;
pub mod buffer;
pub mod config;
pub mod encode;
pub mod error;
pub mod train;

pub use agent::{actor_loss, critic_loss, critic_target, soft_update, SacAgent, UpdateStats};
pub use buffer::{ReplayBuffer, Transition};
pub use config::SacConfig;
pub use encode::{encode_observation, Variant};
pub use error::{Result, SacError};
pub use train::{evaluate, initial_agent, run_episode, train, train_with, ActorDriver, Driver, GoalSeeker, RandomDriver, TrainLogRow, TrainResult};
