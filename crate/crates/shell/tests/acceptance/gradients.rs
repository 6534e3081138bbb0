use cogrisk_neural::{Actor, Critic, EncoderKind, GraphBatch, GraphInput, NetworkConfig, Parameterized, Tensor2};
use cogrisk_sac::{actor_loss, critic_loss, SacAgent, SacConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::Verdict;

const SEEDS: u64 = 20;
const BATCH: usize = 4;
const H: f64 = 1e-5;

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

fn random_graph(rng: &mut ChaCha8Rng) -> GraphInput {
    let n = rng.random_range(1..=4);
    let features = Tensor2::from_vec(n, 9, (0..n * 9).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let mut adj = Tensor2::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            adj.set(i, j, if i == j { 0.5 } else { rng.random_range(0.0..0.5) });
        }
    }
    GraphInput::new(features, adj, vec![rng.random_range(0.0..1.0), rng.random_range(-1.0..1.0)]).unwrap()
}

/// Largest relative error between the accumulated gradients of `net` and
/// central differences of `loss` over every scalar parameter.
fn fd_error<N: Parameterized + Clone>(net: &N, loss: impl Fn(&N) -> f64) -> (f64, usize) {
    let analytic: Vec<Vec<f64>> = net.params().into_iter().map(|(_, p)| p.grad.data().to_vec()).collect();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (i, grads) in analytic.iter().enumerate() {
        for (k, g) in grads.iter().enumerate() {
            let mut plus = net.clone();
            plus.params_mut()[i].1.value.data_mut()[k] += H;
            let mut minus = net.clone();
            minus.params_mut()[i].1.value.data_mut()[k] -= H;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * H);
            worst = worst.max(relative_error(*g, numeric));
            count += 1;
        }
    }
    (worst, count)
}

fn q_values(critic: &Critic, states: &GraphBatch, actions: &Tensor2) -> Vec<f64> {
    critic.forward(states, actions).unwrap().0
}

fn case(seed: u64, encoder: EncoderKind) -> (f64, f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = NetworkConfig { encoder, gcn_hidden: 4, mlp_hidden: vec![6, 5], ..NetworkConfig::default() };
    let config = SacConfig { alpha: rng.random_range(0.05..0.5), ..SacConfig::default() };
    let alpha = config.alpha;
    let mut agent = SacAgent::with_network(config, net, &mut rng).unwrap();
    let graphs: Vec<GraphInput> = (0..BATCH).map(|_| random_graph(&mut rng)).collect();
    let states = GraphBatch::from_inputs(&graphs.iter().collect::<Vec<_>>()).unwrap();
    let actions = Tensor2::from_vec(BATCH, 2, (0..2 * BATCH).map(|_| rng.random_range(-0.95..0.95)).collect()).unwrap();
    let y: Vec<f64> = (0..BATCH).map(|_| rng.random_range(-2.0..2.0)).collect();
    let eps = Tensor2::from_vec(BATCH, 2, (0..2 * BATCH).map(|_| rng.sample(StandardNormal)).collect()).unwrap();

    agent.critic_gradients(&states, &actions, &y).unwrap();
    let mut critic_err: f64 = 0.0;
    let mut count = 0;
    for c in 0..2 {
        let other = q_values(&agent.critics[1 - c], &states, &actions);
        let (err, n) = fd_error(&agent.critics[c], |critic: &Critic| {
            let q = q_values(critic, &states, &actions);
            if c == 0 {
                critic_loss(&q, &other, &y)
            } else {
                critic_loss(&other, &q, &y)
            }
        });
        critic_err = critic_err.max(err);
        count += n;
    }

    agent.actor_gradients(&states, &eps).unwrap();
    let critics = agent.critics.clone();
    let (actor_err, n) = fd_error(&agent.actor, |actor: &Actor| {
        let (sample, _) = actor.sample(&states, &eps).unwrap();
        let q1 = q_values(&critics[0], &states, &sample.unit_action);
        let q2 = q_values(&critics[1], &states, &sample.unit_action);
        actor_loss(&sample.log_prob, &q1, &q2, alpha)
    });
    (critic_err, actor_err, count + n)
}

pub fn run() -> Verdict {
    let (mut critic_err, mut actor_err, mut params): (f64, f64, usize) = (0.0, 0.0, 0);
    for seed in 0..SEEDS {
        for encoder in [EncoderKind::Graph, EncoderKind::Flat { max_nodes: 4 }] {
            let (c, a, n) = case(seed, encoder);
            critic_err = critic_err.max(c);
            actor_err = actor_err.max(a);
            params += n;
        }
    }
    let pass = critic_err < 1e-4 && actor_err < 1e-4;
    Verdict::new(
        pass,
        format!("{SEEDS} seeds x 2 encoders, {params} parameters checked; max rel err critic {critic_err:.2e}, actor {actor_err:.2e}"),
    )
}
