//! Twin-critic soft actor-critic: targets, losses and the update step.

use cogrisk_neural::network::CriticCache;
use cogrisk_neural::{Actor, Adam, Checkpoint, Critic, GraphBatch, GraphInput, NetworkConfig, Parameterized, Tensor2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::buffer::Transition;
use crate::config::SacConfig;
use crate::error::{Result, SacError};

/// `y = r + (1 − done)·(γ·min Q'(s', a') − α·log π(a'|s'))`.
pub fn critic_target(reward: f64, done: bool, min_next_q: f64, next_log_prob: f64, gamma: f64, alpha: f64) -> f64 {
    if done {
        reward
    } else {
        reward + gamma * min_next_q - alpha * next_log_prob
    }
}

/// Mean over the batch and both critics of ½(Q − y)².
pub fn critic_loss(q1: &[f64], q2: &[f64], targets: &[f64]) -> f64 {
    let n = targets.len() as f64;
    let half_sq = |q: &[f64]| q.iter().zip(targets).map(|(q, y)| 0.5 * (q - y) * (q - y)).sum::<f64>() / n;
    0.5 * (half_sq(q1) + half_sq(q2))
}

/// Mean over the batch of α·log π − min(Q₁, Q₂).
pub fn actor_loss(log_prob: &[f64], q1: &[f64], q2: &[f64], alpha: f64) -> f64 {
    let n = log_prob.len() as f64;
    log_prob.iter().zip(q1.iter().zip(q2)).map(|(lp, (a, b))| alpha * lp - a.min(*b)).sum::<f64>() / n
}

/// `θ' ← τ·θ + (1 − τ)·θ'` for every parameter.
pub fn soft_update(target: &mut dyn Parameterized, online: &dyn Parameterized, tau: f64) -> Result<()> {
    let source = online.params();
    let mut dest = target.params_mut();
    if source.len() != dest.len() {
        return Err(SacError::Config("soft update between networks of different structure".into()));
    }
    for ((_, d), (_, s)) in dest.iter_mut().zip(&source) {
        if d.value.shape() != s.value.shape() {
            return Err(SacError::Config("soft update between networks of different shapes".into()));
        }
        for (t, o) in d.value.data_mut().iter_mut().zip(s.value.data()) {
            *t = tau * o + (1.0 - tau) * *t;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub mean_q: f64,
    pub mean_log_prob: f64,
}

#[derive(Debug, Clone)]
pub struct SacAgent {
    pub config: SacConfig,
    pub actor: Actor,
    pub critics: [Critic; 2],
    pub targets: [Critic; 2],
    network: NetworkConfig,
    actor_opt: Adam,
    critic_opts: [Adam; 2],
    updates: u64,
}

fn noise<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Tensor2 {
    Tensor2::from_vec(rows, cols, (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect()).expect("sized by construction")
}

fn dump(batch: &[&Transition]) -> String {
    serde_json::to_string(batch).unwrap_or_else(|e| format!("unserializable batch: {e}"))
}

impl SacAgent {
    /// Networks are initialized in the order actor, critic 1, critic 2; targets start as copies.
    pub fn new<R: Rng + ?Sized>(config: SacConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let net = config.network_config();
        Self::with_network(config, net, rng)
    }

    /// Builds an agent whose networks use `net` instead of the variant's
    /// architecture. Checkpoints of such an agent do not load under `config`.
    pub fn with_network<R: Rng + ?Sized>(config: SacConfig, net: NetworkConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        net.validate()?;
        let actor = Actor::new(&net, rng)?;
        let critics = [Critic::new(&net, rng)?, Critic::new(&net, rng)?];
        let targets = critics.clone();
        Ok(Self {
            actor_opt: Adam::new(config.actor_adam()),
            critic_opts: [Adam::new(config.critic_adam()), Adam::new(config.critic_adam())],
            config,
            actor,
            critics,
            targets,
            network: net,
            updates: 0,
        })
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    fn non_finite(&self, what: &str, batch: &[&Transition]) -> SacError {
        SacError::NonFinite { what: what.into(), update: self.updates, dump: dump(batch) }
    }

    /// Bootstrapped critic targets for a minibatch, with fresh next-state actions.
    pub fn targets_for<R: Rng + ?Sized>(&self, batch: &[&Transition], rng: &mut R) -> Result<Vec<f64>> {
        let next: Vec<&GraphInput> = batch.iter().map(|t| &t.next_state).collect();
        let next = GraphBatch::from_inputs(&next)?;
        let eps = noise(batch.len(), self.network.action_dim(), rng);
        let (sample, _) = self.actor.sample(&next, &eps)?;
        let (q1, _) = self.targets[0].forward(&next, &sample.unit_action)?;
        let (q2, _) = self.targets[1].forward(&next, &sample.unit_action)?;
        Ok(batch
            .iter()
            .enumerate()
            .map(|(b, t)| critic_target(t.reward, t.done, q1[b].min(q2[b]), sample.log_prob[b], self.config.gamma, self.config.alpha))
            .collect())
    }

    /// Sets both critics' gradients to those of `critic_loss` at targets `y`
    /// and returns their Q values.
    pub fn critic_gradients(&mut self, states: &GraphBatch, actions: &Tensor2, y: &[f64]) -> Result<[Vec<f64>; 2]> {
        let n = y.len() as f64;
        let mut qs: [Vec<f64>; 2] = Default::default();
        for (critic, q_out) in self.critics.iter_mut().zip(qs.iter_mut()) {
            let (q, cache) = critic.forward(states, actions)?;
            // d/dQ of the averaged loss: (Q − y) / (2B).
            let d_q: Vec<f64> = q.iter().zip(y).map(|(q, y)| (q - y) / (2.0 * n)).collect();
            critic.zero_grad();
            critic.backward(&cache, states, &d_q, true)?;
            *q_out = q;
        }
        Ok(qs)
    }

    /// Sets the actor's gradients to those of `actor_loss` for actions
    /// reparameterized with noise `eps`; critics are held fixed. Returns the
    /// log-probabilities and both critics' values.
    pub fn actor_gradients(&mut self, states: &GraphBatch, eps: &Tensor2) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let n = states.len() as f64;
        let (sample, actor_cache) = self.actor.sample(states, eps)?;
        let mut evals: Vec<(Vec<f64>, CriticCache)> = Vec::with_capacity(2);
        for critic in &self.critics {
            evals.push(critic.forward(states, &sample.unit_action)?);
        }
        // The gradient flows through whichever critic attains the minimum.
        let first_is_min: Vec<bool> = evals[0].0.iter().zip(&evals[1].0).map(|(a, b)| a <= b).collect();
        let mut d_action = Tensor2::zeros(sample.unit_action.rows(), sample.unit_action.cols());
        for (c, (critic, (_, cache))) in self.critics.iter_mut().zip(&evals).enumerate() {
            let d_q: Vec<f64> = first_is_min.iter().map(|&first| if first == (c == 0) { -1.0 / n } else { 0.0 }).collect();
            d_action.axpy(1.0, &critic.backward(cache, states, &d_q, false)?);
        }
        let d_log_prob = vec![self.config.alpha / n; sample.log_prob.len()];
        self.actor.zero_grad();
        self.actor.backward(&actor_cache, states, &d_action, &d_log_prob)?;
        let mut evals = evals.into_iter().map(|(q, _)| q);
        let q1 = evals.next().expect("two critics");
        let q2 = evals.next().expect("two critics");
        Ok((sample.log_prob, q1, q2))
    }

    /// One gradient step on both critics, then the actor, then the targets.
    pub fn update<R: Rng + ?Sized>(&mut self, batch: &[&Transition], rng: &mut R) -> Result<UpdateStats> {
        if batch.is_empty() {
            return Err(SacError::Config("empty minibatch".into()));
        }
        let n = batch.len() as f64;
        let y = self.targets_for(batch, rng)?;
        let states: Vec<&GraphInput> = batch.iter().map(|t| &t.state).collect();
        let states = GraphBatch::from_inputs(&states)?;
        let actions: Vec<&[f64]> = batch.iter().map(|t| t.action.as_slice()).collect();
        let actions = Tensor2::from_rows(&actions)?;

        let [q1, q2] = self.critic_gradients(&states, &actions, &y)?;
        let c_loss = critic_loss(&q1, &q2, &y);
        if !c_loss.is_finite() {
            return Err(self.non_finite("critic loss", batch));
        }
        for (critic, opt) in self.critics.iter_mut().zip(self.critic_opts.iter_mut()) {
            opt.step(critic)?;
        }

        let eps = noise(batch.len(), self.network.action_dim(), rng);
        let (log_prob, q1, q2) = self.actor_gradients(&states, &eps)?;
        let a_loss = actor_loss(&log_prob, &q1, &q2, self.config.alpha);
        if !a_loss.is_finite() {
            return Err(self.non_finite("actor loss", batch));
        }
        self.actor_opt.step(&mut self.actor)?;

        for (target, critic) in self.targets.iter_mut().zip(&self.critics) {
            soft_update(target, critic, self.config.tau)?;
        }
        self.updates += 1;
        let mean_q = q1.iter().zip(&q2).map(|(a, b)| a.min(*b)).sum::<f64>() / n;
        let mean_log_prob = log_prob.iter().sum::<f64>() / n;
        Ok(UpdateStats { critic_loss: c_loss, actor_loss: a_loss, mean_q, mean_log_prob })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let mut c = Checkpoint::new(self.config.architecture_hash());
        c.add("actor", &self.actor);
        c.add("critic1", &self.critics[0]);
        c.add("critic2", &self.critics[1]);
        c.add("target1", &self.targets[0]);
        c.add("target2", &self.targets[1]);
        c
    }

    /// Rebuilds an agent from a checkpoint written under the same architecture.
    /// Optimizer moments are not stored and restart from zero.
    pub fn from_checkpoint<R: Rng + ?Sized>(config: SacConfig, checkpoint: &Checkpoint, rng: &mut R) -> Result<Self> {
        let mut agent = Self::new(config, rng)?;
        let hash = agent.config.architecture_hash();
        checkpoint.restore(&hash, "actor", &mut agent.actor)?;
        let [c1, c2] = &mut agent.critics;
        checkpoint.restore(&hash, "critic1", c1)?;
        checkpoint.restore(&hash, "critic2", c2)?;
        let [t1, t2] = &mut agent.targets;
        checkpoint.restore(&hash, "target1", t1)?;
        checkpoint.restore(&hash, "target2", t2)?;
        Ok(agent)
    }

    /// Loads only the actor, for evaluation.
    pub fn actor_from_checkpoint<R: Rng + ?Sized>(config: &SacConfig, checkpoint: &Checkpoint, rng: &mut R) -> Result<Actor> {
        config.validate()?;
        let mut actor = Actor::new(&config.network_config(), rng)?;
        checkpoint.restore(&config.architecture_hash(), "actor", &mut actor)?;
        Ok(actor)
    }
}
