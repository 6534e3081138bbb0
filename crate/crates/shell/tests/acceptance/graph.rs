use cogrisk_core::risk::build_adjacency;
use cogrisk_core::world::DT;
use cogrisk_core::{AgentKind, AgentState, DenseMatrix, RiskParams, Vec2, WorldState};
use cogrisk_neural::{gcn_layer, Activation, Dense, Tensor2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Verdict;

const GRAPHS: usize = 300;
const TOL: f64 = 1e-10;

fn random_world(rng: &mut ChaCha8Rng, n: usize) -> WorldState {
    let agents = (0..n)
        .map(|i| {
            let kind = if i == 0 { AgentKind::Av } else { AgentKind::Pedestrian };
            let position = Vec2::new(rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0));
            let goal = Vec2::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0));
            let mut a = AgentState::new(i, kind, position, Vec2::ZERO, goal);
            a.heading = rng.random_range(-3.1..3.1);
            a.speed = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..kind.max_speed()) };
            a.acceleration = rng.random_range(-2.0..2.0);
            a
        })
        .collect();
    WorldState::new(agents, DT).unwrap()
}

/// A(i, j) from the closed forms: distance stretched by tanh of the other
/// agent's line-of-sight speed plus its acceleration, signed by whether the
/// pair separates, then ψ = 1/(1 + γ2·d_v) scaled by 1 + λ·u.
fn oracle_adjacency(world: &WorldState, u: &[Vec<f64>], p: &RiskParams) -> Vec<Vec<f64>> {
    let n = world.agents.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (ego, other) = (&world.agents[i], &world.agents[j]);
            let (dx, dy) = (ego.position.x - other.position.x, ego.position.y - other.position.y);
            let d = (dx * dx + dy * dy).sqrt();
            let (nx, ny) = (dx / d, dy / d);
            let (vox, voy) = (other.speed * other.heading.cos(), other.speed * other.heading.sin());
            let (vex, vey) = (ego.speed * ego.heading.cos(), ego.speed * ego.heading.sin());
            let separating = nx * (vex - vox) + ny * (vey - voy) >= 0.0;
            let sign = if separating { 1.0 } else { -1.0 };
            let motion = (vox * nx + voy * ny).abs() + other.acceleration.abs();
            let dv = d * (1.0 + (p.gamma1 * sign * motion).tanh());
            let psi = 1.0 / (1.0 + p.gamma2 * dv);
            a[i][j] = psi * (1.0 + p.lambda_adj * u[i][j]);
        }
    }
    a
}

fn oracle_features(world: &WorldState) -> Vec<Vec<f64>> {
    let g = world.agents[0].goal;
    world
        .agents
        .iter()
        .map(|a| {
            let av = if a.kind == AgentKind::Av { 1.0 } else { 0.0 };
            vec![
                (a.position.x - g.x) / 30.0,
                (a.position.y - g.y) / 30.0,
                a.heading.cos(),
                a.heading.sin(),
                a.speed / 6.0,
                av * a.acceleration / 2.0,
                (a.goal.x - a.position.x) / 30.0,
                (a.goal.y - a.position.y) / 30.0,
                av,
            ]
        })
        .collect()
}

fn oracle_normalized(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let tilde = |i: usize, j: usize| a[i][j] + if i == j { 1.0 } else { 0.0 };
    let degree: Vec<f64> = (0..n).map(|i| (0..n).map(|j| tilde(i, j)).sum()).collect();
    (0..n).map(|i| (0..n).map(|j| tilde(i, j) / (degree[i] * degree[j]).sqrt()).collect()).collect()
}

/// act(Â·H·W + b), with every sum written out.
fn oracle_gcn(norm: &[Vec<f64>], h: &[Vec<f64>], w: &[Vec<f64>], b: &[f64], act: Activation) -> Vec<Vec<f64>> {
    let n = h.len();
    let (fin, fout) = (w.len(), b.len());
    let mut out = vec![vec![0.0; fout]; n];
    for i in 0..n {
        for o in 0..fout {
            let mut z = b[o];
            for j in 0..n {
                for f in 0..fin {
                    z += norm[i][j] * h[j][f] * w[f][o];
                }
            }
            out[i][o] = match act {
                Activation::Relu => z.max(0.0),
                Activation::Tanh => z.tanh(),
                Activation::Identity => z,
            };
        }
    }
    out
}

fn max_gap(m: &DenseMatrix, oracle: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in oracle.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((m[(i, j)] - v).abs());
        }
    }
    worst
}

pub fn run() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c);
    let mut worst: [f64; 4] = [0.0; 4];
    for g in 0..GRAPHS {
        let n = rng.random_range(2..=6);
        let world = random_world(&mut rng, n);
        let params = RiskParams {
            gamma1: rng.random_range(0.05..1.0),
            gamma2: rng.random_range(0.05..1.0),
            lambda_adj: rng.random_range(0.0..2.0),
            ..RiskParams::default()
        };
        let u: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.random_range(0.0..3.0) }).collect()).collect();
        let mut um = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                um[(i, j)] = u[i][j];
            }
        }
        let graph = build_adjacency(&world, &um, &params).unwrap();
        let a = oracle_adjacency(&world, &u, &params);
        let features = oracle_features(&world);
        let norm = oracle_normalized(&a);
        worst[0] = worst[0].max(max_gap(&graph.adjacency, &a));
        worst[1] = worst[1].max(max_gap(&graph.node_features, &features));
        worst[2] = worst[2].max(max_gap(&graph.normalized, &norm));

        let fout = rng.random_range(1..=5);
        let w: Vec<Vec<f64>> = (0..9).map(|_| (0..fout).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let b: Vec<f64> = (0..fout).map(|_| rng.random_range(-0.5..0.5)).collect();
        let act = [Activation::Relu, Activation::Tanh, Activation::Identity][g % 3];
        let layer = Dense::from_params(Tensor2::from_vec(9, fout, w.iter().flatten().copied().collect()).unwrap(), &b, act).unwrap();
        let h = Tensor2::from_vec(n, 9, graph.node_features.data().to_vec()).unwrap();
        let adj = Tensor2::from_vec(n, n, graph.normalized.data().to_vec()).unwrap();
        let out = gcn_layer(&h, &adj, &layer).unwrap();
        let expected = oracle_gcn(&norm, &features, &w, &b, act);
        for i in 0..n {
            for o in 0..fout {
                worst[3] = worst[3].max((out.get(i, o) - expected[i][o]).abs());
            }
        }
    }
    let pass = worst.iter().all(|w| *w <= TOL);
    Verdict::new(
        pass,
        format!(
            "{GRAPHS} graphs; max |err| adjacency {:.1e}, features {:.1e}, normalized {:.1e}, gcn output {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}
