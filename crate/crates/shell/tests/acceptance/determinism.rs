use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::Verdict;

const CONFIG: &str = "seed = 17\n[sac]\nepisodes = 4\nwarmup = 40\nbatch_size = 16\neval_every = 2\n[generate]\ncount = 6\n";

fn cli(args: &[&str]) {
    let code = cogrisk::cli::run(std::iter::once("cogrisk").chain(args.iter().copied()));
    assert_eq!(code, 0, "cogrisk {} exited with {code}", args.join(" "));
}

/// Generates inputs, then runs simulate, train, eval and simulate with the
/// trained checkpoint, all into `root/out`.
fn pipeline(root: &Path) {
    let s = |p: PathBuf| p.to_str().expect("utf-8 temp path").to_string();
    let config = root.join("config.toml");
    std::fs::write(&config, CONFIG).unwrap();
    let (inputs, out) = (s(root.join("inputs")), s(root.join("out")));
    let config = s(config);
    let base = ["--quiet", "--config", config.as_str(), "--out-dir"];
    let run = |out: &str, rest: &[&str]| cli(&[&base[..], &[out], rest].concat());
    run(&inputs, &["generate"]);
    let scenario = std::fs::read_dir(root.join("inputs/scenarios/test")).unwrap().map(|e| e.unwrap().path()).min().unwrap();
    let (scenario, train, test) = (s(scenario), s(root.join("inputs/scenarios/train")), s(root.join("inputs/scenarios/test")));
    run(&out, &["simulate", "--scenario", &scenario]);
    run(&out, &["train", "--scenarios", &train, "--eval-scenarios", &test]);
    let checkpoint = s(root.join("out/checkpoint.json"));
    run(&out, &["eval", "--scenarios", &test, "--policy", "checkpoint", "--checkpoint", &checkpoint]);
    let policy_out = s(root.join("out/policy"));
    run(&policy_out, &["simulate", "--scenario", &scenario, "--policy", "checkpoint", "--checkpoint", &checkpoint, "--model", "sfm"]);
}

fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    files
}

pub fn run() -> Verdict {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    pipeline(a.path());
    pipeline(b.path());
    let (ta, tb) = (tree(&a.path().join("out")), tree(&b.path().join("out")));
    let differing: Vec<String> =
        ta.keys().chain(tb.keys()).filter(|k| ta.get(*k) != tb.get(*k)).map(|k| k.display().to_string()).collect();
    let bytes: usize = ta.values().map(Vec::len).sum();
    let pass = differing.is_empty() && ta.len() >= 6;
    let detail = if differing.is_empty() {
        format!("{} files, {bytes} bytes identical across two runs of simulate, train, eval", ta.len())
    } else {
        format!("differing files: {}", differing.join(", "))
    };
    Verdict::new(pass, detail)
}
