//! Episode rollouts, policy evaluation and the training loop.

use cogrisk_core::world::{wrap_angle, AV_MAX_ACCEL, AV_MAX_DHEADING};
use cogrisk_core::{Action, Env, EnvConfig, EpisodeLog, Observation, Outcome, Scenario, WorldState};
use cogrisk_neural::Actor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::SacAgent;
use crate::buffer::{ReplayBuffer, Transition};
use crate::config::SacConfig;
use crate::encode::{encode_observation, Variant};
use crate::error::{Result, SacError};

/// Anything that picks AV actions from observations.
pub trait Driver {
    fn act(&mut self, obs: &Observation, world: &WorldState) -> Result<Action>;
}

/// A trained (or untrained) actor, deterministic unless given an RNG.
pub struct ActorDriver<'a> {
    pub actor: &'a Actor,
    pub variant: Variant,
    pub rng: Option<ChaCha8Rng>,
}

impl Driver for ActorDriver<'_> {
    fn act(&mut self, obs: &Observation, _world: &WorldState) -> Result<Action> {
        let input = encode_observation(obs, self.variant)?;
        let out = self.actor.act(&input, self.rng.as_mut())?;
        Ok(Action::new(out.action[0], out.action[1]).clamped())
    }
}

/// Steers straight at the goal and holds a cruise speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalSeeker {
    pub cruise_speed: f64,
}

impl Driver for GoalSeeker {
    fn act(&mut self, _obs: &Observation, world: &WorldState) -> Result<Action> {
        let av = world.av();
        let bearing = wrap_angle((av.goal - av.position).angle() - av.heading);
        let accel = ((self.cruise_speed - av.speed) / world.dt).clamp(-AV_MAX_ACCEL, AV_MAX_ACCEL);
        Ok(Action::new(accel, bearing.clamp(-AV_MAX_DHEADING, AV_MAX_DHEADING)))
    }
}

/// Uniform actions over the full action box.
pub struct RandomDriver(pub ChaCha8Rng);

impl Driver for RandomDriver {
    fn act(&mut self, _obs: &Observation, _world: &WorldState) -> Result<Action> {
        Ok(Action::from_unit([self.0.random_range(-1.0..=1.0), self.0.random_range(-1.0..=1.0)]))
    }
}

/// Runs one episode to termination.
pub fn run_episode(scenario: &Scenario, env_config: &EnvConfig, driver: &mut dyn Driver) -> Result<EpisodeLog> {
    let mut env = Env::new(*env_config);
    let mut obs = env.reset(scenario)?;
    while !env.outcome().is_terminal() {
        let world = env.world().expect("environment was reset").clone();
        let action = driver.act(&obs, &world)?;
        obs = env.step(action)?.observation;
    }
    Ok(env.take_log().expect("environment was reset"))
}

pub fn evaluate(scenarios: &[Scenario], env_config: &EnvConfig, driver: &mut dyn Driver) -> Result<Vec<EpisodeLog>> {
    scenarios.iter().map(|s| run_episode(s, env_config, driver)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRow {
    pub episode: usize,
    pub steps: usize,
    pub episode_return: f64,
    pub outcome: Outcome,
    /// Mean losses over the episode's updates; empty during warm-up.
    pub critic_loss: Option<f64>,
    pub actor_loss: Option<f64>,
    pub alpha: f64,
    pub eval_success_rate: Option<f64>,
    pub eval_collision_rate: Option<f64>,
}

impl TrainLogRow {
    pub const CSV_HEADER: &'static str =
        "episode,steps,return,outcome,critic_loss,actor_loss,alpha,eval_success_rate,eval_collision_rate";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.episode,
            self.steps,
            self.episode_return,
            self.outcome.name(),
            opt(self.critic_loss),
            opt(self.actor_loss),
            self.alpha,
            opt(self.eval_success_rate),
            opt(self.eval_collision_rate)
        )
    }
}

pub struct TrainResult {
    pub agent: SacAgent,
    pub log: Vec<TrainLogRow>,
}

/// Independent random streams derived from the single training seed.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn eval_rates(agent: &SacAgent, scenarios: &[Scenario], env_config: &EnvConfig) -> Result<(f64, f64)> {
    let mut driver = ActorDriver { actor: &agent.actor, variant: agent.config.variant, rng: None };
    let logs = evaluate(scenarios, env_config, &mut driver)?;
    let n = logs.len() as f64;
    let count = |o: Outcome| logs.iter().filter(|l| l.outcome == o).count() as f64 / n;
    Ok((count(Outcome::Success), count(Outcome::Collision)))
}

/// The untrained agent `train` starts from for this seed.
pub fn initial_agent(config: SacConfig, seed: u64) -> Result<SacAgent> {
    SacAgent::new(config, &mut stream(seed, 0))
}

pub fn train(train_set: &[Scenario], eval_set: &[Scenario], env_config: &EnvConfig, config: SacConfig, seed: u64) -> Result<TrainResult> {
    train_with(train_set, eval_set, env_config, config, seed, &mut |_| {})
}

/// Training loop; `observer` sees every log row as it is produced.
pub fn train_with(
    train_set: &[Scenario],
    eval_set: &[Scenario],
    env_config: &EnvConfig,
    config: SacConfig,
    seed: u64,
    observer: &mut dyn FnMut(&TrainLogRow),
) -> Result<TrainResult> {
    if train_set.is_empty() {
        return Err(SacError::Config("training needs at least one scenario".into()));
    }
    let mut pick_rng = stream(seed, 1);
    let mut explore_rng = stream(seed, 2);
    let mut update_rng = stream(seed, 3);
    let mut agent = initial_agent(config.clone(), seed)?;
    let variant = config.variant;
    let mut buffer = ReplayBuffer::new(config.buffer_capacity);
    let mut log = Vec::with_capacity(config.episodes);
    let mut total_steps = 0usize;
    let mut env = Env::new(*env_config);

    for episode in 0..config.episodes {
        let scenario = &train_set[pick_rng.random_range(0..train_set.len())];
        let mut obs = env.reset(scenario)?;
        let mut state = encode_observation(&obs, variant)?;
        let (mut ret, mut steps) = (0.0, 0usize);
        let (mut c_sum, mut a_sum, mut n_updates) = (0.0, 0.0, 0usize);
        while !env.outcome().is_terminal() {
            let unit = if total_steps < config.warmup {
                [explore_rng.random_range(-1.0..=1.0), explore_rng.random_range(-1.0..=1.0)]
            } else {
                let out = agent.actor.act(&state, Some(&mut explore_rng))?;
                [out.unit_action[0], out.unit_action[1]]
            };
            let result = env.step(Action::from_unit(unit))?;
            let next_state = encode_observation(&result.observation, variant)?;
            buffer.push(Transition {
                state,
                action: unit,
                reward: result.reward,
                next_state: next_state.clone(),
                done: matches!(result.outcome, Outcome::Success | Outcome::Collision),
                uncertainties: obs.uncertainties.data().to_vec(),
            });
            obs = result.observation;
            state = next_state;
            ret += result.reward;
            steps += 1;
            total_steps += 1;
            if total_steps >= config.warmup {
                for _ in 0..config.updates_per_step {
                    let Some(batch) = buffer.sample_minibatch(config.batch_size, &mut update_rng) else { break };
                    let stats = agent.update(&batch, &mut update_rng)?;
                    c_sum += stats.critic_loss;
                    a_sum += stats.actor_loss;
                    n_updates += 1;
                }
            }
        }
        let eval_due = config.eval_every > 0 && (episode + 1) % config.eval_every == 0 && !eval_set.is_empty();
        let (eval_success_rate, eval_collision_rate) = if eval_due {
            let (s, c) = eval_rates(&agent, eval_set, env_config)?;
            (Some(s), Some(c))
        } else {
            (None, None)
        };
        let mean = |sum: f64| (n_updates > 0).then(|| sum / n_updates as f64);
        let row = TrainLogRow {
            episode,
            steps,
            episode_return: ret,
            outcome: env.outcome(),
            critic_loss: mean(c_sum),
            actor_loss: mean(a_sum),
            alpha: config.alpha,
            eval_success_rate,
            eval_collision_rate,
        };
        observer(&row);
        log.push(row);
    }
    Ok(TrainResult { agent, log })
}
