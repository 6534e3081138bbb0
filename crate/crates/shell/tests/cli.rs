use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cogrisk::cli::run;
use cogrisk::calibrate::CalibrationResult;
use cogrisk::scenario_file::{read_scenario, write_scenario};
use cogrisk::{ndjson, seeds, trajectory_csv};
use cogrisk_core::world::DT;
use cogrisk_core::{AgentKind, AgentState, MetricsReport, Outcome, PedestrianModelKind, Scenario, Trajectory, Vec2};
use cogrisk_neural::Checkpoint;
use cogrisk_sac::{initial_agent, SacConfig};
use tempfile::TempDir;

fn cogrisk(out: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["cogrisk".to_string(), "--quiet".into(), "--out-dir".into(), out.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    run(argv)
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    files
}

/// A constant-velocity pedestrian walks into the replayed vehicle at step 10.
fn collision_scenario(dir: &Path) -> PathBuf {
    let av = AgentState::new(0, AgentKind::Av, Vec2::ZERO, Vec2::new(4.0, 0.0), Vec2::new(40.0, 0.0));
    let ped = AgentState::new(1, AgentKind::Pedestrian, Vec2::new(20.0, -5.0), Vec2::new(0.0, 1.0), Vec2::new(20.0, 10.0));
    let mut s = Scenario::new("crash", vec![av, ped], PedestrianModelKind::Cv, 20, 3);
    let path: Vec<Vec2> = (0..=20).map(|k| Vec2::new(2.0 * k as f64, 0.0)).collect();
    s.replay[0] = Some(Trajectory::from_positions(&path, DT));
    let file = dir.join("crash.json");
    write_scenario(&file, &s).unwrap();
    file
}

fn generated(dir: &Path, count: usize) -> PathBuf {
    assert_eq!(cogrisk(dir, &["generate", "--count", &count.to_string()]), 0);
    dir.join("scenarios")
}

#[test]
fn help_and_version_succeed_and_bad_flags_fail() {
    let dir = TempDir::new().unwrap();
    assert_eq!(cogrisk(dir.path(), &["--help"]), 0);
    assert_eq!(cogrisk(dir.path(), &["--version"]), 0);
    assert_eq!(cogrisk(dir.path(), &["simulate", "--bogus"]), 1);
    assert_eq!(cogrisk(dir.path(), &["teleport"]), 1);
    assert_eq!(cogrisk(dir.path(), &["generate", "--family", "stampede"]), 1);
}

#[test]
fn eval_on_an_empty_set_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(cogrisk(&dir.path().join("out"), &["eval", "--scenarios", empty.to_str().unwrap()]), 1);
    assert!(!dir.path().join("out").join("report.json").exists());
}

#[test]
fn unreadable_inputs_and_bad_configs_are_rejected() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_ne!(cogrisk(dir.path(), &["simulate", "--scenario", missing.to_str().unwrap()]), 0);
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[sac]\ngamma = 2.0\n").unwrap();
    assert_eq!(cogrisk(dir.path(), &["--config", bad.to_str().unwrap(), "generate"]), 1);
    let garbled = dir.path().join("garbled.json");
    fs::write(&garbled, "{\"id\": ").unwrap();
    assert_eq!(cogrisk(dir.path(), &["simulate", "--scenario", garbled.to_str().unwrap()]), 1);
}

#[test]
fn simulate_with_a_fixed_seed_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let scenarios = generated(&dir.path().join("in"), 4);
    let file = fs::read_dir(scenarios.join("train")).unwrap().next().unwrap().unwrap().path();
    let runs: Vec<_> = (0..2)
        .map(|k| {
            let out = dir.path().join(format!("run{k}"));
            assert_eq!(cogrisk(&out, &["--seed", "7", "simulate", "--scenario", file.to_str().unwrap(), "--policy", "random"]), 0);
            tree(&out)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0].len(), 2);
    let other = dir.path().join("other");
    assert_eq!(cogrisk(&other, &["--seed", "8", "simulate", "--scenario", file.to_str().unwrap(), "--policy", "random"]), 0);
    assert_ne!(tree(&other), runs[0]);
}

#[test]
fn zero_episode_training_writes_the_initialization() {
    let dir = TempDir::new().unwrap();
    let scenarios = generated(&dir.path().join("in"), 3);
    let out = dir.path().join("out");
    assert_eq!(cogrisk(&out, &["--seed", "5", "train", "--scenarios", scenarios.join("train").to_str().unwrap(), "--episodes", "0"]), 0);
    let written = Checkpoint::from_json(&fs::read_to_string(out.join("checkpoint.json")).unwrap()).unwrap();
    let config = SacConfig { episodes: 0, ..SacConfig::default() };
    let expected = initial_agent(config, seeds::derive(5, seeds::TRAIN)).unwrap().checkpoint();
    assert_eq!(written, expected);
    let log = fs::read_to_string(out.join("train_log.csv")).unwrap();
    assert_eq!(log.lines().count(), 1);
}

#[test]
fn written_files_read_back_losslessly() {
    let dir = TempDir::new().unwrap();
    let scenarios = generated(&dir.path().join("in"), 4);
    for entry in fs::read_dir(scenarios.join("test")).unwrap() {
        let path = entry.unwrap().path();
        let again = dir.path().join("again.json");
        write_scenario(&again, &read_scenario(&path).unwrap()).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
    }

    let out = dir.path().join("out");
    let train = scenarios.join("train");
    assert_eq!(cogrisk(&out, &["--config", config_file(dir.path()).to_str().unwrap(), "train", "--scenarios", train.to_str().unwrap()]), 0);
    let ckpt_text = fs::read_to_string(out.join("checkpoint.json")).unwrap();
    assert_eq!(Checkpoint::from_json(&ckpt_text).unwrap().to_json(), ckpt_text);

    let ckpt = out.join("checkpoint.json");
    assert_eq!(cogrisk(&out, &["eval", "--scenarios", train.to_str().unwrap(), "--checkpoint", ckpt.to_str().unwrap()]), 0);
    let report_text = fs::read_to_string(out.join("report.json")).unwrap();
    let report: MetricsReport = serde_json::from_str(&report_text).unwrap();
    assert_eq!(cogrisk::io::to_json_pretty(&report), report_text);
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv, format!("{}\n{}\n", MetricsReport::CSV_HEADER, report.csv_row()));

    for entry in fs::read_dir(out.join("eval_logs")).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let log = ndjson::read_log(&text, "log").unwrap();
        assert_eq!(ndjson::write_log(&log), text);
        let table = trajectory_csv::write_trajectories(&trajectory_csv::from_log(&log));
        assert_eq!(trajectory_csv::write_trajectories(&trajectory_csv::parse_trajectories(&table, "csv").unwrap()), table);
    }
}

fn config_file(dir: &Path) -> PathBuf {
    let path = dir.join("small.toml");
    fs::write(&path, "[sac]\nepisodes = 3\nwarmup = 20\nbatch_size = 8\neval_every = 0\n").unwrap();
    path
}

#[test]
fn rendering_marks_the_collision_once_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let file = collision_scenario(dir.path());
    assert_eq!(cogrisk(dir.path(), &["simulate", "--scenario", file.to_str().unwrap(), "--policy", "replay"]), 0);
    let log_path = dir.path().join("logs").join("crash.ndjson");
    let log = ndjson::read_log(&fs::read_to_string(&log_path).unwrap(), "log").unwrap();
    assert_eq!(log.outcome, Outcome::Collision);

    let mut svgs = Vec::new();
    for panels in ["speed,accel,heading", "speed,accel,heading"] {
        assert_eq!(cogrisk(dir.path(), &["render", "--log", log_path.to_str().unwrap(), "--panels", panels]), 0);
        svgs.push(fs::read_to_string(dir.path().join("crash.svg")).unwrap());
    }
    assert_eq!(svgs[0], svgs[1]);
    let doc = roxmltree::Document::parse(&svgs[0]).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let markers = doc.descendants().filter(|n| n.attribute("class") == Some("collision-marker")).count();
    assert_eq!(markers, 1);

    assert_eq!(cogrisk(dir.path(), &["render", "--log", log_path.to_str().unwrap()]), 0);
    roxmltree::Document::parse(&fs::read_to_string(dir.path().join("crash.svg")).unwrap()).unwrap();
}

#[test]
fn ingest_turns_a_log_table_into_a_scenario() {
    let dir = TempDir::new().unwrap();
    let file = collision_scenario(dir.path());
    assert_eq!(cogrisk(dir.path(), &["simulate", "--scenario", file.to_str().unwrap(), "--policy", "replay"]), 0);
    let csv = dir.path().join("logs").join("crash.csv");
    assert_eq!(cogrisk(dir.path(), &["ingest", "--csv", csv.to_str().unwrap(), "--id", "again", "--model", "sfm"]), 0);
    let s = read_scenario(&dir.path().join("scenarios").join("again.json")).unwrap();
    assert_eq!(s.agents.len(), 2);
    assert_eq!(s.model, PedestrianModelKind::Sfm);
    assert!(s.replay.iter().all(Option::is_some));
}

#[test]
fn recorded_family_calibrates_and_evaluates() {
    let dir = TempDir::new().unwrap();
    let out = dir.path();
    assert_eq!(cogrisk(out, &["generate", "--family", "recorded", "--count", "4"]), 0);
    let root = out.join("scenarios").join("recorded");
    let train = root.join("train");
    assert!(fs::read_dir(&train).unwrap().count() > 0);
    assert_eq!(cogrisk(out, &["calibrate", "--truth", train.to_str().unwrap(), "--model", "sfm", "--budget", "5"]), 0);
    let best = out.join("calibration").join("best.json");
    let result: CalibrationResult = serde_json::from_str(&fs::read_to_string(&best).unwrap()).unwrap();
    assert_eq!(result.trials.len(), 5);
    assert_eq!(fs::read_to_string(out.join("calibration").join("trials.csv")).unwrap().lines().count(), 6);
    let test = root.join("test");
    assert_eq!(
        cogrisk(out, &["eval", "--scenarios", test.to_str().unwrap(), "--policy", "replay", "--model", "sfm", "--params", best.to_str().unwrap()]),
        0
    );
    let report: MetricsReport = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report.ade.is_some_and(|a| a.is_finite()) && report.cr.is_some());
}

#[test]
fn scenario_families_write_their_directories() {
    let dir = TempDir::new().unwrap();
    for family in ["collision", "latent"] {
        assert_eq!(cogrisk(dir.path(), &["--seed", "2", "generate", "--family", family, "--count", "3"]), 0);
        assert_eq!(fs::read_dir(dir.path().join("scenarios").join(family)).unwrap().count(), 3);
    }
}

#[test]
fn example_config_spells_out_the_defaults() {
    let text = include_str!("../../../docs/cogrisk.example.toml");
    assert_eq!(cogrisk::config::ToolkitConfig::from_toml(text, "example").unwrap(), cogrisk::config::ToolkitConfig::default());
}
