//! Observation → network input, per training variant.

use std::f64::consts::PI;

use cogrisk_core::risk::{normalize_adjacency, uniform_adjacency, POSITION_SCALE};
use cogrisk_core::{DenseMatrix, Observation};
use cogrisk_neural::{EncoderKind, GraphInput, NetworkConfig, Tensor2};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// The three policy variants share everything but the observation encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// GCN over the risk-encoded adjacency.
    GSacCog,
    /// GCN over a uniform all-ones adjacency.
    GSacNoCog,
    /// MLP over the flattened, zero-padded node features.
    SSac,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::GSacCog, Variant::GSacNoCog, Variant::SSac];

    pub fn name(self) -> &'static str {
        match self {
            Variant::GSacCog => "g-sac-cog",
            Variant::GSacNoCog => "g-sac-nocog",
            Variant::SSac => "s-sac",
        }
    }

    pub fn network_config(self, max_nodes: usize) -> NetworkConfig {
        let encoder = match self {
            Variant::GSacCog | Variant::GSacNoCog => EncoderKind::Graph,
            Variant::SSac => EncoderKind::Flat { max_nodes },
        };
        NetworkConfig { encoder, ..NetworkConfig::default() }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown variant '{s}' (expected g-sac-cog, g-sac-nocog or s-sac)"))
    }
}

fn tensor(m: &DenseMatrix) -> Tensor2 {
    Tensor2::from_vec(m.rows(), m.cols(), m.data().to_vec()).expect("dense matrix is consistently sized")
}

/// Network input for an observation. Extras are `[d_goal / 30, Δθ / π]`.
pub fn encode_observation(obs: &Observation, variant: Variant) -> Result<GraphInput> {
    let n = obs.graph.nodes();
    let adjacency = match variant {
        Variant::GSacCog => tensor(&obs.graph.normalized),
        Variant::GSacNoCog => tensor(&normalize_adjacency(&uniform_adjacency(n))?),
        Variant::SSac => Tensor2::identity(n),
    };
    let extras = vec![obs.av_extras[0] / POSITION_SCALE, obs.av_extras[1] / PI];
    Ok(GraphInput::new(tensor(&obs.graph.node_features), adjacency, extras)?)
}
