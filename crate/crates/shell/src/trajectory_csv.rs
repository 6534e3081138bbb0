//! Recorded trajectories as CSV with columns `t, agent_id, x, y, vx, vy`
//! (meters, seconds), rows sorted by time then agent.

use cogrisk_core::world::DT;
use cogrisk_core::{AgentKind, AgentState, EpisodeLog, PedestrianModelKind, Scenario, Trajectory, TrajectoryPoint, Vec2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};

pub const HEADER: [&str; 6] = ["t", "agent_id", "x", "y", "vx", "vy"];

/// Relative tolerance on the spacing of time stamps.
const DT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Row {
    t: f64,
    agent_id: u64,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
}

/// Time-aligned trajectories of every agent in a file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub dt: f64,
    pub times: Vec<f64>,
    /// Agent ids as they appear in the file, ascending.
    pub agent_ids: Vec<u64>,
    /// One trajectory per entry of `agent_ids`.
    pub trajectories: Vec<Trajectory>,
}

pub fn parse_trajectories(text: &str, origin: &str) -> Result<TrajectorySet> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let at = |line: u64, m: String| ShellError::parse(format!("{origin}:{line}"), m);
    let headers = reader.headers().map_err(|e| at(1, e.to_string()))?.clone();
    if headers.iter().ne(HEADER) {
        return Err(at(1, format!("header must be {}, found {}", HEADER.join(","), headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows: Vec<(u64, Row)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| at(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let row: Row = record.deserialize(Some(&headers)).map_err(|e| at(line, e.to_string()))?;
        if ![row.t, row.x, row.y, row.vx, row.vy].iter().all(|v| v.is_finite()) {
            return Err(at(line, "non-finite value".into()));
        }
        if let Some((_, prev)) = rows.last() {
            let ordered = row.t > prev.t || (row.t == prev.t && row.agent_id > prev.agent_id);
            if !ordered {
                return Err(at(line, format!("rows must be sorted by (t, agent_id) without duplicates; ({}, {}) follows ({}, {})", row.t, row.agent_id, prev.t, prev.agent_id)));
            }
        }
        rows.push((line, row));
    }
    if rows.is_empty() {
        return Err(ShellError::parse(origin, "no data rows"));
    }

    let mut agent_ids: Vec<u64> = rows.iter().map(|(_, r)| r.agent_id).collect();
    agent_ids.sort_unstable();
    agent_ids.dedup();
    let mut times = Vec::new();
    let mut trajectories = vec![Vec::new(); agent_ids.len()];
    let mut i = 0;
    while i < rows.len() {
        let (line, first) = rows[i];
        let t = first.t;
        let mut slot = 0;
        while i < rows.len() && rows[i].1.t == t {
            let r = rows[i].1;
            if agent_ids[slot] != r.agent_id {
                return Err(at(rows[i].0, format!("agent {} missing at t = {t}", agent_ids[slot])));
            }
            trajectories[slot].push(TrajectoryPoint { position: Vec2::new(r.x, r.y), velocity: Vec2::new(r.vx, r.vy) });
            slot += 1;
            i += 1;
        }
        if slot < agent_ids.len() {
            return Err(at(line, format!("agent {} missing at t = {t}", agent_ids[slot])));
        }
        times.push((line, t));
    }

    let dt = if times.len() > 1 { times[1].1 - times[0].1 } else { DT };
    for (k, &(line, t)) in times.iter().enumerate() {
        let expected = times[0].1 + k as f64 * dt;
        if (t - expected).abs() > DT_TOLERANCE * dt.max(1.0) * (k as f64).max(1.0) {
            return Err(at(line, format!("non-uniform time step: t = {t}, expected {expected} for dt = {dt}")));
        }
    }
    Ok(TrajectorySet {
        dt,
        times: times.into_iter().map(|(_, t)| t).collect(),
        agent_ids,
        trajectories: trajectories.into_iter().map(Trajectory::new).collect(),
    })
}

pub fn write_trajectories(set: &TrajectorySet) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for (k, &t) in set.times.iter().enumerate() {
        for (id, traj) in set.agent_ids.iter().zip(&set.trajectories) {
            let p = traj.points[k];
            let row = Row { t, agent_id: *id, x: p.position.x, y: p.position.y, vx: p.velocity.x, vy: p.velocity.y };
            writer.serialize(row).expect("in-memory write");
        }
    }
    String::from_utf8(writer.into_inner().expect("in-memory write")).expect("csv output is utf-8")
}

/// Recorded states of every agent in a log.
pub fn from_log(log: &EpisodeLog) -> TrajectorySet {
    let trajectories = (0..log.agents.len())
        .map(|a| {
            Trajectory::new(
                log.steps
                    .iter()
                    .map(|s| {
                        let snap = s.agents[a];
                        TrajectoryPoint { position: snap.position(), velocity: Vec2::from_polar(snap.speed, snap.heading) }
                    })
                    .collect(),
            )
        })
        .collect();
    TrajectorySet {
        dt: log.dt,
        times: log.steps.iter().map(|s| s.time).collect(),
        agent_ids: log.agents.iter().map(|a| a.id as u64).collect(),
        trajectories,
    }
}

/// Builds a scenario whose initial states are the first recorded rows and
/// whose goals are the last recorded positions. The lowest id is the AV.
/// Every agent keeps its recording, both as ground truth and for replay.
/// Initial speeds above an agent kind's limit are clamped to it.
pub fn to_scenario(set: &TrajectorySet, id: &str, model: PedestrianModelKind, seed: u64) -> Result<Scenario> {
    let agents = set
        .trajectories
        .iter()
        .enumerate()
        .map(|(i, traj)| {
            let kind = if i == 0 { AgentKind::Av } else { AgentKind::Pedestrian };
            let first = traj.points[0];
            let goal = traj.points.last().expect("trajectories are non-empty").position;
            AgentState::new(i, kind, first.position, first.velocity.clamp_norm(kind.max_speed()), goal)
        })
        .collect();
    let mut scenario = Scenario::new(id, agents, model, set.times.len().saturating_sub(1).max(1), seed);
    scenario.dt = set.dt;
    scenario.replay = set.trajectories.iter().cloned().map(Some).collect();
    scenario.validate()?;
    Ok(scenario)
}
