//! Tanh-squashed diagonal Gaussian policy head.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyOutput {
    /// Pre-squash Gaussian mean.
    pub mean: Vec<f64>,
    /// Clamped to `[LOG_STD_MIN, LOG_STD_MAX]`.
    pub log_std: Vec<f64>,
    /// `tanh(mean + std·ε)`, in `[-1, 1]`.
    pub unit_action: Vec<f64>,
    /// `unit_action` scaled by the action bounds.
    pub action: Vec<f64>,
    /// Log-density of `action` in physical units.
    pub log_prob: f64,
}

pub fn clamp_log_std(x: f64) -> f64 {
    x.clamp(LOG_STD_MIN, LOG_STD_MAX)
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `ln(1 − tanh²(u))` without cancellation for large |u|.
pub fn log_one_minus_tanh_sq(u: f64) -> f64 {
    2.0 * (LN_2 - u - softplus(-2.0 * u))
}

fn log_prob_from_pre(pre: &[f64], eps: &[f64], log_std: &[f64], bounds: &[f64]) -> f64 {
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    let mut lp = 0.0;
    for i in 0..pre.len() {
        lp += -0.5 * eps[i] * eps[i] - log_std[i] - half_ln_2pi - log_one_minus_tanh_sq(pre[i]) - bounds[i].ln();
    }
    lp
}

/// Squashes `mean + exp(log_std)·ε` and scores it.
pub fn squash(mean: &[f64], log_std: &[f64], eps: &[f64], bounds: &[f64]) -> PolicyOutput {
    assert!(
        mean.len() == log_std.len() && mean.len() == eps.len() && mean.len() == bounds.len(),
        "policy head dimension mismatch"
    );
    let log_std: Vec<f64> = log_std.iter().map(|&s| clamp_log_std(s)).collect();
    let pre: Vec<f64> = (0..mean.len()).map(|i| mean[i] + log_std[i].exp() * eps[i]).collect();
    let unit_action: Vec<f64> = pre.iter().map(|u| u.tanh()).collect();
    let action = unit_action.iter().zip(bounds).map(|(a, b)| a * b).collect();
    let log_prob = log_prob_from_pre(&pre, eps, &log_std, bounds);
    PolicyOutput { mean: mean.to_vec(), log_std, unit_action, action, log_prob }
}

/// Samples an action; `rng = None` gives the deterministic (ε = 0) action.
pub fn policy_sample<R: Rng + ?Sized>(mean: &[f64], log_std: &[f64], rng: Option<&mut R>, bounds: &[f64]) -> PolicyOutput {
    let eps: Vec<f64> = match rng {
        Some(r) => (0..mean.len()).map(|_| r.sample(StandardNormal)).collect(),
        None => vec![0.0; mean.len()],
    };
    squash(mean, log_std, &eps, bounds)
}

/// Log-density of a physical action strictly inside the bounds.
pub fn log_prob_of_action(mean: &[f64], log_std: &[f64], action: &[f64], bounds: &[f64]) -> f64 {
    let log_std: Vec<f64> = log_std.iter().map(|&s| clamp_log_std(s)).collect();
    let pre: Vec<f64> = action.iter().zip(bounds).map(|(a, b)| (a / b).atanh()).collect();
    let eps: Vec<f64> = (0..pre.len()).map(|i| (pre[i] - mean[i]) / log_std[i].exp()).collect();
    log_prob_from_pre(&pre, &eps, &log_std, bounds)
}

/// Gradients of a loss with respect to the head's mean and unclamped log-std,
/// given the loss gradients at the unit action and the log-probability.
pub fn squash_backward(
    out: &PolicyOutput,
    eps: &[f64],
    raw_log_std: &[f64],
    d_unit_action: &[f64],
    d_log_prob: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = out.mean.len();
    let mut d_mean = vec![0.0; n];
    let mut d_log_std = vec![0.0; n];
    for i in 0..n {
        let a = out.unit_action[i];
        // d(log_prob)/d(pre) = 2·tanh(pre); d(unit)/d(pre) = 1 − tanh².
        let d_pre = d_unit_action[i] * (1.0 - a * a) + d_log_prob * 2.0 * a;
        d_mean[i] = d_pre;
        let inside = (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw_log_std[i]);
        if inside {
            d_log_std[i] = d_pre * out.log_std[i].exp() * eps[i] - d_log_prob;
        }
    }
    (d_mean, d_log_std)
}
