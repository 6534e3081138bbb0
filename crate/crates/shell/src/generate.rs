//! Synthetic scenario sets: randomized street crossings, and two scripted
//! regression families for pedestrian-model safety.

use cogrisk_core::world::{AV_MAX_SPEED, DT, PED_MAX_SPEED};
use cogrisk_core::{run_replay, AgentKind, AgentState, ModelParams, PedestrianModelKind, Scenario, Trajectory, TrajectoryPoint, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};

/// AV goal distance along +x for crossing scenarios, m.
const ROAD_LENGTH: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerateConfig {
    pub count: usize,
    /// Fraction of scenarios assigned to the training split.
    pub train_fraction: f64,
    pub min_pedestrians: usize,
    pub max_pedestrians: usize,
    pub model: PedestrianModelKind,
    pub max_steps: usize,
    /// Standard deviation of pedestrian force noise, m/s².
    pub behavior_noise: f64,
    /// Scenarios per scripted family.
    pub family_size: usize,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            count: 78,
            train_fraction: 0.77,
            min_pedestrians: 1,
            max_pedestrians: 3,
            model: PedestrianModelKind::CrSfm,
            max_steps: 60,
            behavior_noise: 0.3,
            family_size: 30,
        }
    }
}

impl GenerateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.train_fraction) {
            return Err(ShellError::Validation(format!("train_fraction must lie in [0, 1], got {}", self.train_fraction)));
        }
        if self.min_pedestrians == 0 || self.min_pedestrians > self.max_pedestrians {
            return Err(ShellError::Validation("pedestrian counts must satisfy 1 <= min_pedestrians <= max_pedestrians".into()));
        }
        if self.max_steps == 0 {
            return Err(ShellError::Validation("max_steps must be positive".into()));
        }
        if !(self.behavior_noise.is_finite() && self.behavior_noise >= 0.0) {
            return Err(ShellError::Validation("behavior_noise must be non-negative".into()));
        }
        Ok(())
    }
}

/// Which scenario family to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Randomized crossings driven by the AV policy.
    Crossing,
    /// A recorded AV brakes and then re-accelerates into a crossing pedestrian.
    Collision,
    /// A recorded pedestrian zigzags across a simulated one's path.
    Latent,
    /// Crossings with a recorded AV drive and every pedestrian's simulated
    /// motion stored as its recording: ground truth for calibration.
    Recorded,
}

impl std::str::FromStr for Family {
    type Err = ShellError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crossing" => Ok(Family::Crossing),
            "collision" => Ok(Family::Collision),
            "latent" => Ok(Family::Latent),
            "recorded" => Ok(Family::Recorded),
            other => Err(ShellError::Validation(format!("unknown family '{other}' (crossing, collision, latent, recorded)"))),
        }
    }
}

/// One crossing: the AV drives along the x axis toward x = 40 while each
/// pedestrian crosses the road at its own station from a random side.
pub fn crossing_scenario<R: Rng + ?Sized>(rng: &mut R, id: String, pedestrians: usize, config: &GenerateConfig) -> Scenario {
    let speed = rng.random_range(3.5..4.5);
    let av = AgentState::new(0, AgentKind::Av, Vec2::new(0.0, rng.random_range(-0.5..0.5)), Vec2::new(speed, 0.0), Vec2::new(ROAD_LENGTH, 0.0));
    let mut agents = vec![av];
    let slot = 16.0 / pedestrians as f64;
    for i in 0..pedestrians {
        let x = 12.0 + slot * (i as f64 + rng.random_range(0.1..0.9));
        let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let y0 = side * rng.random_range(4.0..9.0);
        let walk = rng.random_range(1.0..1.5);
        let goal_y = -side * rng.random_range(8.0..12.0);
        agents.push(AgentState::new(i + 1, AgentKind::Pedestrian, Vec2::new(x, y0), Vec2::new(0.0, -side * walk), Vec2::new(x, goal_y)));
    }
    let mut s = Scenario::new(id, agents, config.model, config.max_steps, rng.random());
    s.force_noise = std::iter::once(0.0).chain(std::iter::repeat(config.behavior_noise)).take(pedestrians + 1).collect();
    s
}

/// `count` crossings with pedestrian counts drawn uniformly from the configured range.
pub fn generate_scenarios(count: usize, seed: u64, config: &GenerateConfig) -> Result<Vec<Scenario>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|i| {
            let n = rng.random_range(config.min_pedestrians..=config.max_pedestrians);
            crossing_scenario(&mut rng, format!("crossing-{i:04}"), n, config)
        })
        .collect())
}

/// Splits off the first `round(len * train_fraction)` scenarios for training.
pub fn split(mut scenarios: Vec<Scenario>, train_fraction: f64) -> (Vec<Scenario>, Vec<Scenario>) {
    let n_train = ((scenarios.len() as f64) * train_fraction).round() as usize;
    let test = scenarios.split_off(n_train.min(scenarios.len()));
    (scenarios, test)
}

/// The fixed single-pedestrian crossing: driving on at the initial speed
/// meets the pedestrian in the middle of the road.
pub fn single_crossing(seed: u64, model: PedestrianModelKind) -> Scenario {
    let av = AgentState::new(0, AgentKind::Av, Vec2::ZERO, Vec2::new(4.0, 0.0), Vec2::new(ROAD_LENGTH, 0.0));
    let ped = AgentState::new(1, AgentKind::Pedestrian, Vec2::new(20.0, -7.0), Vec2::new(0.0, 1.4), Vec2::new(20.0, 12.0));
    let mut s = Scenario::new(format!("single-crossing-{seed}"), vec![av, ped], model, 60, seed);
    s.force_noise = vec![0.0, 0.3];
    s
}

/// Speed profile of the recorded AV in the collision family: cruise, brake
/// as if yielding, pause, then re-accelerate.
fn yield_then_go(x0: f64, v0: f64, steps: usize) -> Vec<Vec2> {
    let mut pts = vec![Vec2::new(x0, 0.0)];
    let (mut x, mut v) = (x0, v0);
    for k in 0..steps {
        let a = match k {
            3..=5 => -2.0,
            8..=11 => 2.0,
            _ => 0.0,
        };
        v = (v + a * DT).clamp(0.0, AV_MAX_SPEED);
        x += v * DT;
        pts.push(Vec2::new(x, 0.0));
    }
    pts
}

/// Collision family member: the pedestrian is timed to reach the lane just
/// as the re-accelerating AV arrives there.
pub fn collision_scenario(seed: u64, model: PedestrianModelKind) -> Scenario {
    let steps = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: f64 = rng.random_range(4.5..5.5);
    let path = yield_then_go(-30.0, v, steps);
    let k_meet = rng.random_range(10..13usize);
    let x0 = path[k_meet].x + rng.random_range(-0.5..0.5);
    let walk = 1.3;
    let y0 = -walk * DT * k_meet as f64;
    let av = AgentState::new(0, AgentKind::Av, path[0], Vec2::new(v, 0.0), Vec2::new(ROAD_LENGTH, 0.0));
    let ped = AgentState::new(1, AgentKind::Pedestrian, Vec2::new(x0, y0), Vec2::new(0.0, walk), Vec2::new(x0, 10.0));
    let mut s = Scenario::new(format!("collision-{seed:04}"), vec![av, ped], model, steps, seed);
    s.replay[0] = Some(Trajectory::from_positions(&path, DT));
    s.force_noise = vec![0.0, 0.2];
    s
}

/// Latent-risk family member: a recorded pedestrian zigzags across the
/// simulated pedestrian's path while the AV stands far away.
pub fn latent_scenario(seed: u64, model: PedestrianModelKind) -> Scenario {
    let steps = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parked = Vec2::new(-60.0, -60.0);
    let av = AgentState::new(0, AgentKind::Av, parked, Vec2::ZERO, Vec2::new(-60.0, 60.0));
    let y1: f64 = rng.random_range(-0.3..0.3);
    let walk = 1.3;
    let ped = AgentState::new(1, AgentKind::Pedestrian, Vec2::new(-8.0, y1), Vec2::new(walk, 0.0), Vec2::new(10.0, y1));
    let xg: f64 = rng.random_range(-1.0..1.0);
    let t_meet = (xg + 8.0) / walk + rng.random_range(-0.5..0.5);
    let descent = 1.2;
    let amp: f64 = rng.random_range(1.2..1.8);
    let mut pts = Vec::with_capacity(steps + 1);
    let mut p = Vec2::new(xg, descent * t_meet);
    for k in 0..=steps {
        pts.push(p);
        let lateral = if (k / 2) % 2 == 0 { amp } else { -amp };
        p = p + Vec2::new(lateral, -descent) * DT;
    }
    let zigzag = Trajectory::from_positions(&pts, DT);
    let ghost = AgentState::new(2, AgentKind::Pedestrian, pts[0], zigzag.points[0].velocity.clamp_norm(PED_MAX_SPEED), pts[steps]);
    let mut s = Scenario::new(format!("latent-{seed:04}"), vec![av, ped, ghost], model, steps, seed);
    s.replay[0] = Some(Trajectory::from_positions(&[parked], DT));
    s.replay[2] = Some(zigzag);
    s.force_noise = vec![0.0, 0.2, 0.0];
    s
}

/// A recorded AV drive along +x from `start`: cruise at `speed`, with a
/// random braking and recovery episode.
pub fn av_drive<R: Rng + ?Sized>(rng: &mut R, start: Vec2, speed: f64, steps: usize) -> Vec<Vec2> {
    let brake_at = rng.random_range(2..8usize);
    let brake_for = rng.random_range(0..4usize);
    let pause = rng.random_range(0..4usize);
    let mut pts = vec![start];
    let (mut p, mut v) = (start, speed);
    for k in 0..steps {
        let a = if k >= brake_at && k < brake_at + brake_for {
            -2.0
        } else if k >= brake_at + brake_for + pause && v < speed {
            2.0
        } else {
            0.0
        };
        v = (v + a * DT).clamp(0.0, AV_MAX_SPEED);
        p = p + Vec2::new(v * DT, 0.0);
        pts.push(p);
    }
    pts
}

/// Runs `scenario` (whose AV must carry a recording) for `steps` steps under
/// `params`, then returns it with every agent's simulated motion attached as
/// its recording.
pub fn record(scenario: &Scenario, params: &ModelParams, steps: usize) -> Result<Scenario> {
    let log = run_replay(scenario, params, steps)?;
    let mut out = scenario.clone();
    out.max_steps = steps;
    out.replay = (0..log.agents.len())
        .map(|a| {
            Some(Trajectory::new(
                log.steps
                    .iter()
                    .map(|s| TrajectoryPoint { position: s.agents[a].position(), velocity: Vec2::from_polar(s.agents[a].speed, s.agents[a].heading) })
                    .collect(),
            ))
        })
        .collect();
    Ok(out)
}

/// Crossings recorded under `params` for `config.max_steps` steps, each AV
/// following a randomized `av_drive`.
pub fn recorded_crossings(count: usize, seed: u64, config: &GenerateConfig, params: &ModelParams) -> Result<Vec<Scenario>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.random_range(config.min_pedestrians..=config.max_pedestrians);
            let mut s = crossing_scenario(&mut rng, format!("recorded-{i:04}"), n, config);
            let path = av_drive(&mut rng, s.agents[0].position, s.agents[0].speed, config.max_steps);
            s.replay[0] = Some(Trajectory::from_positions(&path, DT));
            record(&s, params, config.max_steps)
        })
        .collect()
}

/// `params` only affects the recorded family.
pub fn family(family: Family, count: usize, seed: u64, config: &GenerateConfig, params: &ModelParams) -> Result<Vec<Scenario>> {
    match family {
        Family::Crossing => generate_scenarios(count, seed, config),
        Family::Recorded => recorded_crossings(count, seed, config, params),
        Family::Collision => Ok((0..count as u64).map(|i| collision_scenario(seed.wrapping_add(i), config.model)).collect()),
        Family::Latent => Ok((0..count as u64).map(|i| latent_scenario(seed.wrapping_add(i), config.model)).collect()),
    }
}
