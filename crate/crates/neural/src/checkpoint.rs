//! Versioned JSON dump of named parameter tensors.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::layers::Parameterized;

pub const CHECKPOINT_FORMAT: &str = "cogrisk-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedTensor {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    /// Hash of the configuration the parameters were produced under.
    pub config_hash: String,
    pub tensors: Vec<NamedTensor>,
}

impl Checkpoint {
    pub fn new(config_hash: impl Into<String>) -> Self {
        Self { format: CHECKPOINT_FORMAT.into(), version: CHECKPOINT_VERSION, config_hash: config_hash.into(), tensors: Vec::new() }
    }

    /// Appends every parameter of `net` under `prefix`.
    pub fn add(&mut self, prefix: &str, net: &dyn Parameterized) {
        for (name, p) in net.params() {
            self.tensors.push(NamedTensor {
                name: format!("{prefix}.{name}"),
                rows: p.value.rows(),
                cols: p.value.cols(),
                data: p.value.data().to_vec(),
            });
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_str(text).map_err(|e| NnError::Checkpoint(e.to_string()))?;
        ckpt.validate()?;
        Ok(ckpt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(NnError::Checkpoint(format!("unknown format '{}'", self.format)));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(NnError::Checkpoint(format!("unsupported version {}", self.version)));
        }
        let mut seen = BTreeSet::new();
        for t in &self.tensors {
            if !seen.insert(t.name.as_str()) {
                return Err(NnError::Checkpoint(format!("duplicate tensor '{}'", t.name)));
            }
            if t.rows.checked_mul(t.cols) != Some(t.data.len()) {
                return Err(NnError::Checkpoint(format!("tensor '{}' declares {}x{} but holds {} values", t.name, t.rows, t.cols, t.data.len())));
            }
            if t.data.iter().any(|v| !v.is_finite()) {
                return Err(NnError::Checkpoint(format!("tensor '{}' has non-finite values", t.name)));
            }
        }
        Ok(())
    }

    /// Loads the tensors stored under `prefix` into `net`, checking that the
    /// configuration hash, names and shapes all match.
    pub fn restore(&self, expected_hash: &str, prefix: &str, net: &mut dyn Parameterized) -> Result<()> {
        if self.config_hash != expected_hash {
            return Err(NnError::Checkpoint(format!(
                "checkpoint was written for configuration {} but {} is active",
                self.config_hash, expected_hash
            )));
        }
        let head = format!("{prefix}.");
        let stored: Vec<&NamedTensor> = self.tensors.iter().filter(|t| t.name.starts_with(&head)).collect();
        let mut params = net.params_mut();
        if stored.len() != params.len() {
            return Err(NnError::Checkpoint(format!("'{prefix}' has {} tensors, network expects {}", stored.len(), params.len())));
        }
        for ((name, p), t) in params.iter().zip(&stored) {
            if t.name != format!("{head}{name}") || (t.rows, t.cols) != p.value.shape() {
                return Err(NnError::Checkpoint(format!(
                    "tensor '{}' {}x{} does not match parameter '{head}{name}' {:?}",
                    t.name,
                    t.rows,
                    t.cols,
                    p.value.shape()
                )));
            }
        }
        for ((_, p), t) in params.iter_mut().zip(&stored) {
            p.value.data_mut().copy_from_slice(&t.data);
        }
        Ok(())
    }
}
