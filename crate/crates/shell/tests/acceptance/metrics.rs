use cogrisk_core::log::{AgentInfo, AgentSnapshot, StepRecord};
use cogrisk_core::metrics::{ade, av_report, fde, mean_ade, mean_fde, pedestrian_cr};
use cogrisk_core::{AgentKind, EpisodeLog, Outcome, PedestrianModelKind, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Verdict;

const LOGS: usize = 100;
const TOL: f64 = 1e-12;

fn random_log(rng: &mut ChaCha8Rng, index: usize) -> EpisodeLog {
    let n = rng.random_range(2..=4);
    let agents = (0..n)
        .map(|id| AgentInfo {
            id,
            kind: if id == 0 { AgentKind::Av } else { AgentKind::Pedestrian },
            radius: if id == 0 { 1.0 } else { 0.3 },
            goal: Vec2::new(40.0, 0.0),
            simulated: id > 0 && rng.random_bool(0.7),
        })
        .collect();
    let dt = [0.5, 0.1, 0.25][index % 3];
    let mut log = EpisodeLog::new(format!("random-{index}"), index as u64, PedestrianModelKind::CrSfm, dt, agents);
    let steps = rng.random_range(1..=40);
    for k in 0..steps {
        let snaps = (0..n)
            .map(|_| AgentSnapshot {
                x: rng.random_range(-50.0..50.0),
                y: rng.random_range(-50.0..50.0),
                heading: rng.random_range(-3.0..3.0),
                speed: rng.random_range(0.0..6.0),
                accel: rng.random_range(-2.0..2.0),
            })
            .collect();
        let collisions = if rng.random_bool(0.05) { vec![(0, rng.random_range(1..n))] } else { vec![] };
        log.steps.push(StepRecord { step: k, time: k as f64 * dt, agents: snaps, action: None, reward: None, uncertainties: vec![vec![0.0; n]; n], collisions });
    }
    log.outcome = [Outcome::Success, Outcome::Collision, Outcome::Timeout][rng.random_range(0..3)];
    log
}

fn positions(rng: &mut ChaCha8Rng) -> Vec<Vec2> {
    (0..rng.random_range(1..=30)).map(|_| Vec2::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0))).collect()
}

fn dist(a: Vec2, b: Vec2) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

fn naive_ade(sim: &[Vec2], truth: &[Vec2]) -> f64 {
    let n = sim.len().min(truth.len());
    let mut total = 0.0;
    for t in 0..n {
        total += dist(sim[t], truth[t]);
    }
    total / n as f64
}

fn naive_fde(sim: &[Vec2], truth: &[Vec2]) -> f64 {
    let last = sim.len().min(truth.len()) - 1;
    dist(sim[last], truth[truth.len() - 1])
}

/// Outcome rates, pooled AV speed and jerk, and the episode mean of peak |accel|.
fn naive_report(logs: &[EpisodeLog]) -> [f64; 6] {
    let m = logs.len() as f64;
    let rate = |o: Outcome| logs.iter().filter(|l| l.outcome == o).count() as f64 / m;
    let mut speeds = Vec::new();
    let mut jerks = Vec::new();
    let mut peaks = Vec::new();
    for log in logs {
        let mut peak: f64 = 0.0;
        for (k, step) in log.steps.iter().enumerate() {
            let av = &step.agents[0];
            speeds.push(av.speed);
            peak = peak.max(av.accel.abs());
            if k > 0 {
                jerks.push((av.accel - log.steps[k - 1].agents[0].accel).abs() / log.dt);
            }
        }
        peaks.push(peak);
    }
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    [rate(Outcome::Success), rate(Outcome::Collision), rate(Outcome::Timeout), mean(&speeds), mean(&jerks), mean(&peaks)]
}

fn naive_cr(logs: &[EpisodeLog]) -> f64 {
    let hits = logs
        .iter()
        .filter(|log| {
            log.steps.iter().any(|s| s.collisions.iter().any(|&(i, j)| log.agents[i].simulated || log.agents[j].simulated))
        })
        .count();
    hits as f64 / logs.len() as f64
}

pub fn run() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x8e);
    let logs: Vec<EpisodeLog> = (0..LOGS).map(|i| random_log(&mut rng, i)).collect();
    let mut worst: f64 = 0.0;
    let mut pairs = Vec::new();
    for log in &logs {
        let sim = log.trajectory(1);
        let truth = positions(&mut rng);
        worst = worst.max((ade(&sim, &truth).unwrap() - naive_ade(&sim, &truth)).abs());
        worst = worst.max((fde(&sim, &truth).unwrap() - naive_fde(&sim, &truth)).abs());
        pairs.push((sim, truth));
    }
    let per_episode = |f: fn(&[Vec2], &[Vec2]) -> f64| pairs.iter().map(|(s, t)| f(s, t)).sum::<f64>() / pairs.len() as f64;
    worst = worst.max((mean_ade(&pairs).unwrap() - per_episode(naive_ade)).abs());
    worst = worst.max((mean_fde(&pairs).unwrap() - per_episode(naive_fde)).abs());

    for chunk in [&logs[..], &logs[..1], &logs[10..37]] {
        let r = av_report(chunk).unwrap();
        let got = [r.success_rate, r.collision_rate, r.timeout_rate, r.avg_speed, r.avg_jerk, r.avg_max_abs_accel];
        for (g, w) in got.iter().zip(naive_report(chunk)) {
            worst = worst.max((g - w).abs());
        }
        worst = worst.max((pedestrian_cr(chunk).unwrap() - naive_cr(chunk)).abs());
    }
    Verdict::new(worst <= TOL, format!("{LOGS} random logs; max |err| {worst:.1e}"))
}
