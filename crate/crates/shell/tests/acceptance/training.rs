use cogrisk::generate::{generate_scenarios, single_crossing, GenerateConfig};
use cogrisk_core::metrics::av_report;
use cogrisk_core::{EnvConfig, PedestrianModelKind, Scenario};
use cogrisk_sac::{evaluate, initial_agent, train, ActorDriver, SacAgent, SacConfig, Variant};

use crate::Verdict;

const SINGLE_EPISODES: usize = 150;
const SUITE_EPISODES: usize = 300;
const SUITE_SEEDS: [u64; 2] = [1, 2];
const EVAL_EPISODES: usize = 50;

fn success_rate(agent: &SacAgent, scenarios: &[Scenario], env: &EnvConfig) -> f64 {
    let mut driver = ActorDriver { actor: &agent.actor, variant: agent.config.variant, rng: None };
    av_report(&evaluate(scenarios, env, &mut driver).unwrap()).unwrap().success_rate
}

fn trained(variant: Variant, episodes: usize, train_set: &[Scenario], env: &EnvConfig, seed: u64) -> SacAgent {
    let config = SacConfig { variant, episodes, eval_every: 0, ..SacConfig::default() };
    train(train_set, &[], env, config, seed).unwrap().agent
}

pub fn run() -> Verdict {
    let env = EnvConfig::default();
    let single_train: Vec<Scenario> = (0..20).map(|s| single_crossing(s, PedestrianModelKind::CrSfm)).collect();
    let single_eval: Vec<Scenario> = (0..EVAL_EPISODES as u64).map(|s| single_crossing(1000 + s, PedestrianModelKind::CrSfm)).collect();
    let untrained = success_rate(&initial_agent(SacConfig::default(), 0).unwrap(), &single_eval, &env);
    let learned = success_rate(&trained(Variant::GSacCog, SINGLE_EPISODES, &single_train, &env, 0), &single_eval, &env);

    let suite = GenerateConfig { min_pedestrians: 3, max_pedestrians: 3, ..GenerateConfig::default() };
    let suite_train = generate_scenarios(200, 11, &suite).unwrap();
    let suite_eval = generate_scenarios(EVAL_EPISODES, 12, &suite).unwrap();
    let mean_rate = |variant: Variant| {
        SUITE_SEEDS.iter().map(|&seed| success_rate(&trained(variant, SUITE_EPISODES, &suite_train, &env, seed), &suite_eval, &env)).sum::<f64>()
            / SUITE_SEEDS.len() as f64
    };
    let (cog, nocog, flat) = (mean_rate(Variant::GSacCog), mean_rate(Variant::GSacNoCog), mean_rate(Variant::SSac));
    // Binomial standard error of the difference of two rates over the pooled evaluation episodes.
    let n = (EVAL_EPISODES * SUITE_SEEDS.len()) as f64;
    let noise = ((cog * (1.0 - cog) + flat * (1.0 - flat)) / n).sqrt();
    let pass = learned >= 0.9 && untrained <= 0.3 && cog >= nocog;
    Verdict::new(
        pass,
        format!(
            "single crossing success {learned:.2} after {SINGLE_EPISODES} episodes vs {untrained:.2} untrained; \
             3-pedestrian suite success g-sac-cog {cog:.3}, g-sac-nocog {nocog:.3}, s-sac {flat:.3} \
             (cog - s-sac {:+.3}, noise +/- {noise:.3}, reported only)",
            cog - flat
        ),
    )
}
