//! Actor and critic networks over graph (or flattened) observations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::graph::{flatten, readout, readout_backward, GraphBatch, GraphInput};
use crate::layers::{Activation, GcnCache, GcnLayer, Mlp, MlpCache, Param, Parameterized};
use crate::policy::{clamp_log_std, squash, squash_backward, PolicyOutput};
use crate::tensor::Tensor2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EncoderKind {
    /// Two graph convolutions followed by mean-pool ⊕ ego-node readout.
    Graph,
    /// No encoder: node rows flattened and zero-padded to `max_nodes`.
    Flat { max_nodes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub encoder: EncoderKind,
    pub node_features: usize,
    pub extras: usize,
    pub gcn_hidden: usize,
    pub mlp_hidden: Vec<usize>,
    /// Physical half-range of each action dimension.
    pub action_bounds: Vec<f64>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            encoder: EncoderKind::Graph,
            node_features: 9,
            extras: 2,
            gcn_hidden: 64,
            mlp_hidden: vec![128, 128],
            action_bounds: vec![2.0, 0.2],
        }
    }
}

impl NetworkConfig {
    pub fn action_dim(&self) -> usize {
        self.action_bounds.len()
    }

    pub fn embedding_dim(&self) -> usize {
        match self.encoder {
            EncoderKind::Graph => 2 * self.gcn_hidden + self.extras,
            EncoderKind::Flat { max_nodes } => max_nodes * self.node_features + self.extras,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sizes_ok = self.node_features > 0 && self.gcn_hidden > 0 && self.mlp_hidden.iter().all(|&h| h > 0);
        let bounds_ok = !self.action_bounds.is_empty() && self.action_bounds.iter().all(|b| b.is_finite() && *b > 0.0);
        let flat_ok = !matches!(self.encoder, EncoderKind::Flat { max_nodes: 0 });
        if sizes_ok && bounds_ok && flat_ok {
            Ok(())
        } else {
            Err(NnError::Shape(format!("invalid network configuration {self:?}")))
        }
    }
}

fn prefixed<'a>(prefix: &str, params: Vec<(String, &'a Param)>) -> impl Iterator<Item = (String, &'a Param)> + 'a {
    let prefix = prefix.to_string();
    params.into_iter().map(move |(n, p)| (format!("{prefix}.{n}"), p))
}

fn prefixed_mut<'a>(prefix: &str, params: Vec<(String, &'a mut Param)>) -> impl Iterator<Item = (String, &'a mut Param)> + 'a {
    let prefix = prefix.to_string();
    params.into_iter().map(move |(n, p)| (format!("{prefix}.{n}"), p))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Encoder {
    Graph { gcn1: GcnLayer, gcn2: GcnLayer },
    Flat { max_nodes: usize },
}

#[derive(Debug, Clone)]
pub enum EncoderCache {
    Graph { c1: GcnCache, c2: GcnCache, width: usize },
    Flat,
}

impl Encoder {
    pub fn new<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Self {
        match config.encoder {
            EncoderKind::Graph => Encoder::Graph {
                gcn1: GcnLayer::new(config.node_features, config.gcn_hidden, Activation::Relu, rng),
                gcn2: GcnLayer::new(config.gcn_hidden, config.gcn_hidden, Activation::Relu, rng),
            },
            EncoderKind::Flat { max_nodes } => Encoder::Flat { max_nodes },
        }
    }

    pub fn forward(&self, batch: &GraphBatch) -> Result<(Tensor2, EncoderCache)> {
        match self {
            Encoder::Graph { gcn1, gcn2 } => {
                let (h1, c1) = gcn1.forward(&batch.features, &batch.layout)?;
                let (h2, c2) = gcn2.forward(&h1, &batch.layout)?;
                let emb = readout(&h2, &batch.layout, &batch.extras)?;
                Ok((emb, EncoderCache::Graph { c1, c2, width: h2.cols() }))
            }
            Encoder::Flat { max_nodes } => Ok((flatten(batch, *max_nodes)?, EncoderCache::Flat)),
        }
    }

    pub fn backward(&mut self, cache: &EncoderCache, d_emb: &Tensor2, batch: &GraphBatch) -> Result<()> {
        match (self, cache) {
            (Encoder::Graph { gcn1, gcn2 }, EncoderCache::Graph { c1, c2, width }) => {
                let d_h2 = readout_backward(d_emb, &batch.layout, *width)?;
                let d_h1 = gcn2.backward(c2, &d_h2, &batch.layout)?;
                gcn1.backward(c1, &d_h1, &batch.layout)?;
                Ok(())
            }
            (Encoder::Flat { .. }, EncoderCache::Flat) => Ok(()),
            _ => Err(NnError::Shape("encoder cache does not match encoder".into())),
        }
    }
}

impl Parameterized for Encoder {
    fn params(&self) -> Vec<(String, &Param)> {
        match self {
            Encoder::Graph { gcn1, gcn2 } => prefixed("gcn1", gcn1.params()).chain(prefixed("gcn2", gcn2.params())).collect(),
            Encoder::Flat { .. } => Vec::new(),
        }
    }

    fn params_mut(&mut self) -> Vec<(String, &mut Param)> {
        match self {
            Encoder::Graph { gcn1, gcn2 } => {
                prefixed_mut("gcn1", gcn1.params_mut()).chain(prefixed_mut("gcn2", gcn2.params_mut())).collect()
            }
            Encoder::Flat { .. } => Vec::new(),
        }
    }
}

/// Gaussian policy: encoder → MLP → `[mean, log_std]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    pub config: NetworkConfig,
    pub encoder: Encoder,
    pub mlp: Mlp,
}

#[derive(Debug, Clone)]
pub struct ActorCache {
    encoder: EncoderCache,
    mlp: MlpCache,
    raw_log_std: Tensor2,
    eps: Tensor2,
    outputs: Vec<PolicyOutput>,
}

/// Reparameterized samples for a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorSample {
    /// `B × action_dim`, in `[-1, 1]`.
    pub unit_action: Tensor2,
    pub log_prob: Vec<f64>,
}

impl Actor {
    pub fn new<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let encoder = Encoder::new(config, rng);
        let mut sizes = vec![config.embedding_dim()];
        sizes.extend(&config.mlp_hidden);
        sizes.push(2 * config.action_dim());
        let mlp = Mlp::new(&sizes, Activation::Relu, Activation::Identity, rng);
        Ok(Self { config: config.clone(), encoder, mlp })
    }

    fn head(&self, batch: &GraphBatch) -> Result<(Tensor2, EncoderCache, MlpCache)> {
        let (emb, enc) = self.encoder.forward(batch)?;
        let (out, mlp) = self.mlp.forward(&emb)?;
        out.check_finite("actor output")?;
        Ok((out, enc, mlp))
    }

    /// Samples `tanh(mean + std·ε)` for each graph with the given noise `ε` (`B × action_dim`).
    pub fn sample(&self, batch: &GraphBatch, eps: &Tensor2) -> Result<(ActorSample, ActorCache)> {
        let k = self.config.action_dim();
        if eps.shape() != (batch.len(), k) {
            return Err(NnError::Shape(format!("noise {:?} for {} graphs", eps.shape(), batch.len())));
        }
        let (out, encoder, mlp) = self.head(batch)?;
        let mut raw_log_std = Tensor2::zeros(batch.len(), k);
        let mut unit_action = Tensor2::zeros(batch.len(), k);
        let mut log_prob = Vec::with_capacity(batch.len());
        let mut outputs = Vec::with_capacity(batch.len());
        for b in 0..batch.len() {
            let row = out.row(b);
            raw_log_std.row_mut(b).copy_from_slice(&row[k..]);
            let o = squash(&row[..k], &row[k..], eps.row(b), &self.config.action_bounds);
            unit_action.row_mut(b).copy_from_slice(&o.unit_action);
            log_prob.push(o.log_prob);
            outputs.push(o);
        }
        Ok((ActorSample { unit_action, log_prob }, ActorCache { encoder, mlp, raw_log_std, eps: eps.clone(), outputs }))
    }

    /// Accumulates parameter gradients given dL/d(unit_action) and dL/d(log_prob).
    pub fn backward(&mut self, cache: &ActorCache, batch: &GraphBatch, d_unit_action: &Tensor2, d_log_prob: &[f64]) -> Result<()> {
        let k = self.config.action_dim();
        if d_unit_action.shape() != (cache.outputs.len(), k) || d_log_prob.len() != cache.outputs.len() {
            return Err(NnError::Shape("actor upstream gradient shape mismatch".into()));
        }
        let mut d_out = Tensor2::zeros(cache.outputs.len(), 2 * k);
        for (b, o) in cache.outputs.iter().enumerate() {
            let (dm, ds) = squash_backward(o, cache.eps.row(b), cache.raw_log_std.row(b), d_unit_action.row(b), d_log_prob[b]);
            let row = d_out.row_mut(b);
            row[..k].copy_from_slice(&dm);
            row[k..].copy_from_slice(&ds);
        }
        let d_emb = self.mlp.backward(&cache.mlp, &d_out, true)?;
        self.encoder.backward(&cache.encoder, &d_emb, batch)
    }

    /// Mean and clamped log-std for one observation.
    pub fn distribution(&self, input: &GraphInput) -> Result<(Vec<f64>, Vec<f64>)> {
        let batch = GraphBatch::from_inputs(&[input])?;
        let (out, _, _) = self.head(&batch)?;
        let k = self.config.action_dim();
        let row = out.row(0);
        Ok((row[..k].to_vec(), row[k..].iter().map(|&s| clamp_log_std(s)).collect()))
    }

    /// Stochastic action for exploration, or the deterministic one when `rng` is `None`.
    pub fn act<R: Rng + ?Sized>(&self, input: &GraphInput, rng: Option<&mut R>) -> Result<PolicyOutput> {
        let (mean, log_std) = self.distribution(input)?;
        Ok(crate::policy::policy_sample(&mean, &log_std, rng, &self.config.action_bounds))
    }
}

impl Parameterized for Actor {
    fn params(&self) -> Vec<(String, &Param)> {
        prefixed("encoder", self.encoder.params()).chain(prefixed("mlp", self.mlp.params())).collect()
    }

    fn params_mut(&mut self) -> Vec<(String, &mut Param)> {
        prefixed_mut("encoder", self.encoder.params_mut()).chain(prefixed_mut("mlp", self.mlp.params_mut())).collect()
    }
}

/// Q-network: encoder ⊕ unit action → MLP → scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct Critic {
    pub config: NetworkConfig,
    pub encoder: Encoder,
    pub mlp: Mlp,
}

#[derive(Debug, Clone)]
pub struct CriticCache {
    encoder: EncoderCache,
    mlp: MlpCache,
}

impl Critic {
    pub fn new<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let encoder = Encoder::new(config, rng);
        let mut sizes = vec![config.embedding_dim() + config.action_dim()];
        sizes.extend(&config.mlp_hidden);
        sizes.push(1);
        let mlp = Mlp::new(&sizes, Activation::Relu, Activation::Identity, rng);
        Ok(Self { config: config.clone(), encoder, mlp })
    }

    /// Q values for each graph paired with the matching row of `unit_actions`.
    pub fn forward(&self, batch: &GraphBatch, unit_actions: &Tensor2) -> Result<(Vec<f64>, CriticCache)> {
        let k = self.config.action_dim();
        if unit_actions.shape() != (batch.len(), k) {
            return Err(NnError::Shape(format!("actions {:?} for {} graphs", unit_actions.shape(), batch.len())));
        }
        let (emb, encoder) = self.encoder.forward(batch)?;
        let e = emb.cols();
        let mut input = Tensor2::zeros(batch.len(), e + k);
        for b in 0..batch.len() {
            let row = input.row_mut(b);
            row[..e].copy_from_slice(emb.row(b));
            row[e..].copy_from_slice(unit_actions.row(b));
        }
        let (q, mlp) = self.mlp.forward(&input)?;
        q.check_finite("critic output")?;
        Ok((q.into_data(), CriticCache { encoder, mlp }))
    }

    /// Returns dL/d(action). Parameter gradients are accumulated only when
    /// `param_grads` is set; otherwise the encoder is not visited.
    pub fn backward(&mut self, cache: &CriticCache, batch: &GraphBatch, d_q: &[f64], param_grads: bool) -> Result<Tensor2> {
        let k = self.config.action_dim();
        let d_out = Tensor2::from_vec(d_q.len(), 1, d_q.to_vec())?;
        let d_input = self.mlp.backward(&cache.mlp, &d_out, param_grads)?;
        let e = d_input.cols() - k;
        let mut d_action = Tensor2::zeros(d_q.len(), k);
        let mut d_emb = Tensor2::zeros(d_q.len(), e);
        for b in 0..d_q.len() {
            d_emb.row_mut(b).copy_from_slice(&d_input.row(b)[..e]);
            d_action.row_mut(b).copy_from_slice(&d_input.row(b)[e..]);
        }
        if param_grads {
            self.encoder.backward(&cache.encoder, &d_emb, batch)?;
        }
        Ok(d_action)
    }
}

impl Parameterized for Critic {
    fn params(&self) -> Vec<(String, &Param)> {
        prefixed("encoder", self.encoder.params()).chain(prefixed("mlp", self.mlp.params())).collect()
    }

    fn params_mut(&mut self) -> Vec<(String, &mut Param)> {
        prefixed_mut("encoder", self.encoder.params_mut()).chain(prefixed_mut("mlp", self.mlp.params_mut())).collect()
    }
}
