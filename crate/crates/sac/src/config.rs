use cogrisk_neural::{AdamConfig, NetworkConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encode::Variant;
use crate::error::{Result, SacError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SacConfig {
    pub variant: Variant,
    /// Node capacity of the flat (S-SAC) encoding.
    pub max_nodes: usize,
    pub gamma: f64,
    pub tau: f64,
    /// Fixed entropy temperature.
    pub alpha: f64,
    pub batch_size: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub buffer_capacity: usize,
    /// Environment steps of uniform-random actions before learning starts.
    pub warmup: usize,
    pub updates_per_step: usize,
    pub episodes: usize,
    /// Evaluate every this many episodes; 0 disables periodic evaluation.
    pub eval_every: usize,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            variant: Variant::GSacCog,
            max_nodes: 4,
            gamma: 0.99,
            tau: 0.005,
            alpha: 0.2,
            batch_size: 256,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            buffer_capacity: 100_000,
            warmup: 1000,
            updates_per_step: 1,
            episodes: 3000,
            eval_every: 100,
        }
    }
}

impl SacConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(SacError::Config(m.into()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return fail("gamma must lie in [0, 1]");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return fail("tau must lie in (0, 1]");
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return fail("alpha must be finite and non-negative");
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return fail("batch_size must be positive and no larger than buffer_capacity");
        }
        if self.max_nodes == 0 {
            return fail("max_nodes must be positive");
        }
        self.actor_adam().validate()?;
        self.critic_adam().validate()?;
        self.network_config().validate()?;
        Ok(())
    }

    pub fn network_config(&self) -> NetworkConfig {
        self.variant.network_config(self.max_nodes)
    }

    pub fn actor_adam(&self) -> AdamConfig {
        AdamConfig { learning_rate: self.actor_lr, ..AdamConfig::default() }
    }

    pub fn critic_adam(&self) -> AdamConfig {
        AdamConfig { learning_rate: self.critic_lr, ..AdamConfig::default() }
    }

    /// SHA-256 over the architecture-defining part of the configuration.
    pub fn architecture_hash(&self) -> String {
        let text = serde_json::to_string(&(self.variant, self.network_config())).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
