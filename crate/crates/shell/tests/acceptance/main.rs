//! Acceptance criteria. Prints one pass/fail line per criterion and exits
//! nonzero if any fails. Numeric arguments select a subset, e.g. `-- 1 4`.

mod calibration;
mod cognition;
mod determinism;
mod families;
mod gradients;
mod graph;
mod metrics;
mod spot;
mod training;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

/// Outcome of one criterion with a short summary of what was measured.
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Verdict,
}

const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, name: "cognition oracle", limit: Some(Duration::from_secs(10)), run: cognition::run },
    Criterion { id: 2, name: "gradient correctness", limit: Some(Duration::from_secs(60)), run: gradients::run },
    Criterion { id: 3, name: "gcn/adjacency oracle", limit: None, run: graph::run },
    Criterion { id: 4, name: "closed-form spot values", limit: None, run: spot::run },
    Criterion { id: 5, name: "cr-sfm safety ordering", limit: Some(Duration::from_secs(120)), run: families::run },
    Criterion { id: 6, name: "pedestrian-model accuracy ordering", limit: Some(Duration::from_secs(600)), run: calibration::run },
    Criterion { id: 7, name: "policy learning", limit: Some(Duration::from_secs(1800)), run: training::run },
    Criterion { id: 8, name: "metric kit oracle", limit: None, run: metrics::run },
    Criterion { id: 9, name: "determinism", limit: None, run: determinism::run },
];

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "panicked".into())
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for c in CRITERIA.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| Verdict::new(false, format!("error: {}", panic_message(p))));
        let elapsed = start.elapsed();
        let in_time = c.limit.map_or(true, |l| elapsed <= l);
        let pass = verdict.pass && in_time;
        let limit = c.limit.map(|l| format!(" of {} s allowed", l.as_secs())).unwrap_or_default();
        println!(
            "criterion {} {}: {} ({}; {:.1} s{limit})",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            verdict.detail,
            elapsed.as_secs_f64()
        );
        if !pass {
            failures += 1;
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
