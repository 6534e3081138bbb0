//! Fixed-horizon rollouts with no external control: recorded agents replay
//! their trajectories and the remaining pedestrians follow the behaviour model.

use crate::env::Scenario;
use crate::error::{Result, SimError};
use crate::log::{AgentInfo, EpisodeLog, Outcome};
use crate::sim::{Control, CrowdSim, ModelParams};
use crate::world::{all_collisions, AgentKind};

/// Runs `steps` steps. The AV must carry a recording. The outcome is
/// `Collision` if any simulated pedestrian touched another agent, otherwise
/// `Timeout`; nothing terminates the rollout early.
pub fn run_replay(scenario: &Scenario, params: &ModelParams, steps: usize) -> Result<EpisodeLog> {
    scenario.validate()?;
    if scenario.replay.first().map_or(true, Option::is_none) {
        return Err(SimError::Validation(format!("scenario '{}' has no recorded AV trajectory to replay", scenario.id)));
    }
    let mut sim = CrowdSim::new(
        scenario.initial_world()?,
        scenario.controls(true),
        scenario.model,
        *params,
        scenario.force_noise.clone(),
        scenario.seed,
    )?;
    let agents = sim
        .world()
        .agents
        .iter()
        .zip(sim.controls())
        .map(|(a, c)| AgentInfo {
            id: a.id,
            kind: a.kind,
            radius: a.radius,
            goal: a.goal,
            simulated: a.kind == AgentKind::Pedestrian && matches!(c, Control::Model),
        })
        .collect();
    let mut log = EpisodeLog::new(scenario.id.clone(), scenario.seed, scenario.model, scenario.dt, agents);
    let rows = |sim: &CrowdSim| {
        let u = sim.uncertainties();
        (0..u.rows()).map(|i| u.row(i).to_vec()).collect::<Vec<_>>()
    };
    log.push_state(sim.world(), None, None, rows(&sim), all_collisions(sim.world()));
    for _ in 0..steps {
        sim.advance(None)?;
        log.push_state(sim.world(), None, None, rows(&sim), all_collisions(sim.world()));
    }
    let simulated: Vec<usize> = log.simulated_ids().collect();
    log.outcome = if simulated.iter().any(|&id| log.any_collision_involving(id)) { Outcome::Collision } else { Outcome::Timeout };
    Ok(log)
}
