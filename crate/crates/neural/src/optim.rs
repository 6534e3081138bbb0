//! Adam optimizer over a network's parameter list.

use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::layers::Parameterized;
use crate::tensor::Tensor2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 3e-4, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate.is_finite()
            && self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(NnError::Shape(format!("invalid Adam configuration {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    step: u64,
    /// First and second moment estimates, in parameter order.
    moments: Vec<(Tensor2, Tensor2)>,
}

impl Adam {
    pub fn new(config: AdamConfig) -> Self {
        Self { config, step: 0, moments: Vec::new() }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one bias-corrected update from the accumulated gradients.
    pub fn step(&mut self, net: &mut dyn Parameterized) -> Result<()> {
        let mut params = net.params_mut();
        if self.moments.is_empty() {
            self.moments =
                params.iter().map(|(_, p)| (Tensor2::zeros(p.value.rows(), p.value.cols()), Tensor2::zeros(p.value.rows(), p.value.cols()))).collect();
        }
        if self.moments.len() != params.len() {
            return Err(NnError::Shape(format!("optimizer tracks {} tensors, network has {}", self.moments.len(), params.len())));
        }
        for ((name, p), (m, _)) in params.iter().zip(&self.moments) {
            if p.value.shape() != m.shape() {
                return Err(NnError::Shape(format!("parameter {name} changed shape")));
            }
            p.grad.check_finite(&format!("gradient of {name}"))?;
        }
        self.step += 1;
        let AdamConfig { learning_rate, beta1, beta2, epsilon } = self.config;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);
        for ((_, p), (m, v)) in params.iter_mut().zip(self.moments.iter_mut()) {
            let grads = p.grad.data().to_vec();
            let values = p.value.data_mut();
            for (((x, g), mi), vi) in values.iter_mut().zip(&grads).zip(m.data_mut()).zip(v.data_mut()) {
                *mi = beta1 * *mi + (1.0 - beta1) * g;
                *vi = beta2 * *vi + (1.0 - beta2) * g * g;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *x -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}
