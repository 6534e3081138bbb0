use cogrisk::scenario_file::{parse_scenario, ScenarioFile};
use cogrisk::trajectory_csv::{parse_trajectories, to_scenario, write_trajectories, TrajectorySet};
use cogrisk::{ndjson, seeds};
use cogrisk_core::world::DT;
use cogrisk_core::{run_replay, AgentKind, AgentState, ModelParams, PedestrianModelKind, Scenario, Trajectory, TrajectoryPoint, Vec2};
use proptest::prelude::*;

fn arb_point() -> impl Strategy<Value = TrajectoryPoint> {
    (-50.0f64..50.0, -50.0f64..50.0, -2.0f64..2.0, -2.0f64..2.0)
        .prop_map(|(x, y, vx, vy)| TrajectoryPoint { position: Vec2::new(x, y), velocity: Vec2::new(vx, vy) })
}

fn arb_set() -> impl Strategy<Value = TrajectorySet> {
    (1usize..5, 1usize..8, 0.0f64..100.0).prop_flat_map(|(agents, steps, t0)| {
        prop::collection::vec(prop::collection::vec(arb_point(), steps), agents).prop_map(move |paths| TrajectorySet {
            dt: DT,
            times: (0..steps).map(|k| t0 + DT * k as f64).collect(),
            agent_ids: (0..agents as u64).map(|i| 3 * i + 1).collect(),
            trajectories: paths.into_iter().map(Trajectory::new).collect(),
        })
    })
}

fn arb_scenario() -> impl Strategy<Value = Scenario> {
    (
        prop::collection::vec((5.0f64..35.0, 3.0f64..9.0, 0.3f64..1.5, any::<bool>()), 1..4),
        0.0f64..6.0,
        prop::sample::select(PedestrianModelKind::ALL.to_vec()),
        1usize..100,
        any::<u64>(),
        0.0f64..0.5,
    )
        .prop_map(|(peds, speed, model, steps, seed, noise)| {
            let mut agents = vec![AgentState::new(0, AgentKind::Av, Vec2::ZERO, Vec2::new(speed, 0.0), Vec2::new(40.0, 0.0))];
            for (i, (x, y, walk, north)) in peds.into_iter().enumerate() {
                let side = if north { 1.0 } else { -1.0 };
                agents.push(AgentState::new(i + 1, AgentKind::Pedestrian, Vec2::new(x, -side * y), Vec2::new(0.0, side * walk), Vec2::new(x, side * 10.0)));
            }
            let n = agents.len();
            let mut s = Scenario::new(format!("s-{seed}"), agents, model, steps, seed);
            s.force_noise = (0..n).map(|i| if i == 0 { 0.0 } else { noise }).collect();
            s
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trajectory_tables_round_trip(set in arb_set()) {
        let text = write_trajectories(&set);
        let back = parse_trajectories(&text, "t").unwrap();
        prop_assert_eq!(write_trajectories(&back), text);
        prop_assert_eq!(back.agent_ids, set.agent_ids);
        for (a, b) in back.trajectories.iter().zip(&set.trajectories) {
            prop_assert_eq!(&a.points, &b.points);
        }
    }

    #[test]
    fn ingested_tables_keep_every_agent(set in arb_set(), seed in any::<u64>()) {
        prop_assume!(set.times.len() >= 2);
        let s = to_scenario(&set, "ingested", PedestrianModelKind::CrSfm, seed).unwrap();
        prop_assert_eq!(s.agents.len(), set.agent_ids.len());
        prop_assert_eq!(s.agents[0].kind, AgentKind::Av);
        for (r, t) in s.replay.iter().zip(&set.trajectories) {
            prop_assert_eq!(r.as_ref().unwrap().positions(), t.positions());
        }
    }

    #[test]
    fn scenario_files_round_trip(s in arb_scenario()) {
        let text = ScenarioFile::from_scenario(&s).to_json();
        let back = parse_scenario(&text, "s").unwrap();
        prop_assert_eq!(ScenarioFile::from_scenario(&back).to_json(), text);
        prop_assert_eq!(back.agents.len(), s.agents.len());
        prop_assert_eq!(back.seed, s.seed);
        prop_assert_eq!(back.model, s.model);
    }

    #[test]
    fn episode_logs_round_trip(s in arb_scenario()) {
        let mut s = s;
        s.max_steps = s.max_steps.min(30);
        let path: Vec<Vec2> = (0..=s.max_steps).map(|k| Vec2::new(2.0 * k as f64, 0.0)).collect();
        s.replay[0] = Some(Trajectory::from_positions(&path, DT));
        let log = run_replay(&s, &ModelParams::default(), s.max_steps).unwrap();
        let text = ndjson::write_log(&log);
        let back = ndjson::read_log(&text, "log").unwrap();
        prop_assert_eq!(&back, &log);
        prop_assert_eq!(ndjson::write_log(&back), text);
    }

    #[test]
    fn component_seeds_are_distinct(master in any::<u64>()) {
        let streams = [seeds::GENERATE, seeds::TRAIN, seeds::EVAL, seeds::CALIBRATE, seeds::SIMULATE];
        let derived: Vec<u64> = streams.iter().map(|&c| seeds::derive(master, c)).collect();
        for i in 0..derived.len() {
            for j in i + 1..derived.len() {
                prop_assert_ne!(derived[i], derived[j]);
            }
        }
    }
}
