//! Episode logs as newline-delimited JSON: one header record, one record per
//! step, one outcome record.

use cogrisk_core::log::{AgentInfo, StepRecord};
use cogrisk_core::{EpisodeLog, Outcome, PedestrianModelKind};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShellError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Header { scenario_id: String, seed: u64, model: PedestrianModelKind, dt: f64, agents: Vec<AgentInfo> },
    Step(StepRecord),
    Outcome { outcome: Outcome },
}

pub fn write_log(log: &EpisodeLog) -> String {
    let mut out = String::new();
    let mut push = |r: &LogRecord| {
        out.push_str(&serde_json::to_string(r).expect("log record serializes"));
        out.push('\n');
    };
    push(&LogRecord::Header {
        scenario_id: log.scenario_id.clone(),
        seed: log.seed,
        model: log.model,
        dt: log.dt,
        agents: log.agents.clone(),
    });
    for step in &log.steps {
        push(&LogRecord::Step(step.clone()));
    }
    push(&LogRecord::Outcome { outcome: log.outcome });
    out
}

pub fn read_log(text: &str, origin: &str) -> Result<EpisodeLog> {
    let mut log: Option<EpisodeLog> = None;
    let mut finished = false;
    let err = |line: usize, m: String| ShellError::parse(format!("{origin}:{line}"), m);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        if finished {
            return Err(err(line, "record after the outcome record".into()));
        }
        let record: LogRecord = serde_json::from_str(raw).map_err(|e| err(line, e.to_string()))?;
        match (record, log.as_mut()) {
            (LogRecord::Header { scenario_id, seed, model, dt, agents }, None) => {
                log = Some(EpisodeLog::new(scenario_id, seed, model, dt, agents));
            }
            (LogRecord::Header { .. }, Some(_)) => return Err(err(line, "duplicate header record".into())),
            (_, None) => return Err(err(line, "first record must be the header".into())),
            (LogRecord::Step(step), Some(l)) => {
                if step.step != l.steps.len() {
                    return Err(err(line, format!("expected step {}, found {}", l.steps.len(), step.step)));
                }
                if step.agents.len() != l.agents.len() {
                    return Err(err(line, format!("step has {} agents, header declares {}", step.agents.len(), l.agents.len())));
                }
                l.steps.push(step);
            }
            (LogRecord::Outcome { outcome }, Some(l)) => {
                l.outcome = outcome;
                finished = true;
            }
        }
    }
    match log {
        Some(l) if finished => Ok(l),
        Some(_) => Err(ShellError::parse(origin, "missing outcome record")),
        None => Err(ShellError::parse(origin, "empty log")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cogrisk_core::{AgentKind, AgentState, Scenario, Trajectory, Vec2};

    fn sample_log() -> EpisodeLog {
        let av = AgentState::new(0, AgentKind::Av, Vec2::new(-10.0, 0.0), Vec2::new(3.0, 0.0), Vec2::new(10.0, 0.0));
        let ped = AgentState::new(1, AgentKind::Pedestrian, Vec2::new(0.0, -3.0), Vec2::new(0.0, 1.2), Vec2::new(0.0, 5.0));
        let mut s = Scenario::new("n", vec![av, ped], PedestrianModelKind::CrSfm, 12, 4);
        let path: Vec<Vec2> = (0..=12).map(|k| Vec2::new(-10.0 + 1.5 * k as f64, 0.0)).collect();
        s.replay[0] = Some(Trajectory::from_positions(&path, 0.5));
        s.force_noise = vec![0.0, 0.3];
        cogrisk_core::run_replay(&s, &Default::default(), 12).unwrap()
    }

    #[test]
    fn round_trip_is_lossless() {
        let log = sample_log();
        let text = write_log(&log);
        assert_eq!(text.lines().count(), log.steps.len() + 2);
        assert_eq!(read_log(&text, "t").unwrap(), log);
    }

    #[test]
    fn structural_errors_carry_line_numbers() {
        let text = write_log(&sample_log());
        let lines: Vec<&str> = text.lines().collect();
        let missing_outcome = lines[..lines.len() - 1].join("\n");
        assert!(read_log(&missing_outcome, "t").is_err());
        let skipped = [lines[0], lines[2]].join("\n");
        let e = read_log(&skipped, "t").unwrap_err().to_string();
        assert!(e.contains("t:2"), "{e}");
        let garbage = [lines[0], "{not json"].join("\n");
        assert!(read_log(&garbage, "t").unwrap_err().to_string().contains("t:2"));
        assert!(read_log(lines[1], "t").is_err());
        assert!(read_log("", "t").is_err());
    }
}
