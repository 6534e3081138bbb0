//! Dense tensors, graph convolution and MLP layers with hand-derived reverse
//! passes, a tanh-squashed Gaussian policy head, Adam, and checkpoints.

pub mod checkpoint;
pub mod error;
pub mod graph;
pub mod layers;
pub mod network;
pub mod optim;
pub mod policy;
pub mod tensor;

pub use checkpoint::Checkpoint;
pub use error::{NnError, Result};
pub use graph::{GraphBatch, GraphInput, GraphLayout};
pub use layers::{gcn_layer, mlp_forward, Activation, Dense, GcnLayer, Mlp, Param, Parameterized};
pub use network::{Actor, ActorSample, Critic, EncoderKind, NetworkConfig};
pub use optim::{Adam, AdamConfig};
pub use policy::{policy_sample, PolicyOutput};
pub use tensor::Tensor2;
