//! Affine layers with cached forward passes and hand-derived backward passes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::graph::GraphLayout;
use crate::tensor::{add_matmul_tn, matmul, matmul_nt, Tensor2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output.
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// A trainable tensor and its accumulated gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: Tensor2,
    pub grad: Tensor2,
}

impl Param {
    pub fn new(value: Tensor2) -> Self {
        let grad = Tensor2::zeros(value.rows(), value.cols());
        Self { value, grad }
    }
}

/// Anything that owns named parameters, listed in a fixed order.
pub trait Parameterized {
    fn params(&self) -> Vec<(String, &Param)>;
    fn params_mut(&mut self) -> Vec<(String, &mut Param)>;

    fn zero_grad(&mut self) {
        for (_, p) in self.params_mut() {
            p.grad.fill(0.0);
        }
    }

    fn num_params(&self) -> usize {
        self.params().iter().map(|(_, p)| p.value.data().len()).sum()
    }
}

/// `y = σ(x·W + b)` applied row-wise to a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `in × out`.
    pub weight: Param,
    /// `1 × out`.
    pub bias: Param,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    input: Tensor2,
    output: Tensor2,
}

impl Dense {
    /// Uniform ±1/√fan_in initialization for weights and bias.
    pub fn new<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, activation: Activation, rng: &mut R) -> Self {
        let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
        let mut draw = |n: usize| (0..n).map(|_| rng.random_range(-bound..=bound)).collect::<Vec<_>>();
        let w = Tensor2::from_vec(fan_in, fan_out, draw(fan_in * fan_out)).expect("sized by construction");
        let b = Tensor2::from_vec(1, fan_out, draw(fan_out)).expect("sized by construction");
        Self { weight: Param::new(w), bias: Param::new(b), activation }
    }

    pub fn from_params(weight: Tensor2, bias: &[f64], activation: Activation) -> Result<Self> {
        if bias.len() != weight.cols() {
            return Err(NnError::Shape(format!("bias of length {} for {} outputs", bias.len(), weight.cols())));
        }
        Ok(Self { weight: Param::new(weight), bias: Param::new(Tensor2::row_vector(bias)), activation })
    }

    pub fn fan_in(&self) -> usize {
        self.weight.value.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.value.cols()
    }

    pub fn forward(&self, x: &Tensor2) -> Result<(Tensor2, DenseCache)> {
        if x.cols() != self.fan_in() {
            return Err(NnError::Shape(format!("dense layer expects {} inputs, got {}", self.fan_in(), x.cols())));
        }
        let mut y = matmul(x, &self.weight.value)?;
        y.add_row_broadcast(self.bias.value.data());
        let act = self.activation;
        y.data_mut().iter_mut().for_each(|v| *v = act.apply(*v));
        Ok((y.clone(), DenseCache { input: x.clone(), output: y }))
    }

    /// Returns dL/dx; accumulates dL/dW and dL/db when `param_grads` is set.
    pub fn backward(&mut self, cache: &DenseCache, d_out: &Tensor2, param_grads: bool) -> Result<Tensor2> {
        if d_out.shape() != cache.output.shape() {
            return Err(NnError::Shape(format!("upstream gradient {:?} vs output {:?}", d_out.shape(), cache.output.shape())));
        }
        let mut dz = d_out.clone();
        let act = self.activation;
        dz.data_mut().iter_mut().zip(cache.output.data()).for_each(|(g, y)| *g *= act.derivative_from_output(*y));
        if param_grads {
            add_matmul_tn(&mut self.weight.grad, &cache.input, &dz)?;
            self.bias.grad.axpy(1.0, &dz.column_sums());
        }
        matmul_nt(&dz, &self.weight.value)
    }
}

impl Parameterized for Dense {
    fn params(&self) -> Vec<(String, &Param)> {
        vec![("weight".into(), &self.weight), ("bias".into(), &self.bias)]
    }

    fn params_mut(&mut self) -> Vec<(String, &mut Param)> {
        vec![("weight".into(), &mut self.weight), ("bias".into(), &mut self.bias)]
    }
}

/// Chain of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

#[derive(Debug, Clone)]
pub struct MlpCache {
    layers: Vec<DenseCache>,
}

impl Mlp {
    /// `sizes = [in, h1, ..., out]`; hidden layers use `hidden`, the last `output`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Self {
        let n = sizes.len().saturating_sub(1);
        let layers = (0..n)
            .map(|i| Dense::new(sizes[i], sizes[i + 1], if i + 1 == n { output } else { hidden }, rng))
            .collect();
        Self { layers }
    }

    pub fn forward(&self, x: &Tensor2) -> Result<(Tensor2, MlpCache)> {
        let mut h = x.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (y, c) = layer.forward(&h)?;
            caches.push(c);
            h = y;
        }
        Ok((h, MlpCache { layers: caches }))
    }

    pub fn backward(&mut self, cache: &MlpCache, d_out: &Tensor2, param_grads: bool) -> Result<Tensor2> {
        let mut g = d_out.clone();
        for (layer, c) in self.layers.iter_mut().zip(&cache.layers).rev() {
            g = layer.backward(c, &g, param_grads)?;
        }
        Ok(g)
    }
}

impl Parameterized for Mlp {
    fn params(&self) -> Vec<(String, &Param)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.params().into_iter().map(move |(n, p)| (format!("{i}.{n}"), p)))
            .collect()
    }

    fn params_mut(&mut self) -> Vec<(String, &mut Param)> {
        self.layers
            .iter_mut()
            .enumerate()
            .flat_map(|(i, l)| l.params_mut().into_iter().map(move |(n, p)| (format!("{i}.{n}"), p)))
            .collect()
    }
}

/// Forward pass of an affine chain on a single input vector.
pub fn mlp_forward(x: &[f64], layers: &[Dense]) -> Result<Vec<f64>> {
    let mut h = Tensor2::row_vector(x);
    for layer in layers {
        h = layer.forward(&h)?.0;
    }
    Ok(h.into_data())
}

/// Graph convolution `σ(Â·H·W + b)` over a batch of disjoint graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnLayer {
    pub dense: Dense,
}

#[derive(Debug, Clone)]
pub struct GcnCache {
    dense: DenseCache,
}

impl GcnLayer {
    pub fn new<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, activation: Activation, rng: &mut R) -> Self {
        Self { dense: Dense::new(fan_in, fan_out, activation, rng) }
    }

    pub fn forward(&self, h: &Tensor2, layout: &GraphLayout) -> Result<(Tensor2, GcnCache)> {
        let propagated = layout.propagate(h)?;
        let (y, dense) = self.dense.forward(&propagated)?;
        Ok((y, GcnCache { dense }))
    }

    pub fn backward(&mut self, cache: &GcnCache, d_out: &Tensor2, layout: &GraphLayout) -> Result<Tensor2> {
        let d_propagated = self.dense.backward(&cache.dense, d_out, true)?;
        layout.propagate_transposed(&d_propagated)
    }
}

impl Parameterized for GcnLayer {
    fn params(&self) -> Vec<(String, &Param)> {
        self.dense.params()
    }

    fn params_mut(&mut self) -> Vec<(String, &mut Param)> {
        self.dense.params_mut()
    }
}

/// One graph convolution on a single graph with a precomputed normalized adjacency.
pub fn gcn_layer(h: &Tensor2, normalized_adj: &Tensor2, layer: &Dense) -> Result<Tensor2> {
    let layout = GraphLayout::single(normalized_adj.clone(), h.rows())?;
    GcnLayer { dense: layer.clone() }.forward(h, &layout).map(|(y, _)| y)
}
