//! The `cogrisk` command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use cogrisk_core::{EpisodeLog, MetricsReport, PedestrianModelKind, Scenario};
use cogrisk_neural::{Actor, Checkpoint};
use cogrisk_sac::{evaluate, run_episode, train_with, ActorDriver, Driver, GoalSeeker, RandomDriver, SacAgent, SacConfig, TrainLogRow, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calibrate::{calibrate, pedestrian_report, CalibrationSpec};
use crate::config::{PolicyKind, ToolkitConfig};
use crate::error::{Result, ShellError};
use crate::generate::{family, split, Family};
use crate::io::{read_text, to_json_pretty, write_file};
use crate::render::{render_svg, Panel};
use crate::scenario_file::{read_scenario, read_scenario_set, write_scenario};
use crate::{ndjson, seeds, trajectory_csv};

#[derive(Debug, Parser)]
#[command(name = "cogrisk", version, about = "Risk-aware pedestrian simulation and AV policy learning")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving all outputs.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out_dir: PathBuf,
    /// Suppress progress and summary output.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate scenario files.
    Generate(GenerateArgs),
    /// Run one scenario and write its episode log.
    Simulate(SimulateArgs),
    /// Train a SAC policy and write a checkpoint and training log.
    Train(TrainArgs),
    /// Evaluate a policy or pedestrian model over a scenario set.
    Eval(EvalArgs),
    /// Fit pedestrian-model parameters to recorded trajectories.
    Calibrate(CalibrateArgs),
    /// Draw an episode log as SVG.
    Render(RenderArgs),
    /// Convert a trajectory CSV into a scenario file.
    Ingest(IngestArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// crossing, collision, latent or recorded.
    #[arg(long, default_value = "crossing")]
    pub family: String,
    /// Number of scenarios (defaults to generate.count or generate.family_size).
    #[arg(long)]
    pub count: Option<usize>,
    /// Training fraction for crossing sets.
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long)]
    pub model: Option<PedestrianModelKind>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file.
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,
    /// Overrides the scenario's pedestrian model.
    #[arg(long)]
    pub model: Option<PedestrianModelKind>,
    /// replay, goal-seeker, random or checkpoint.
    #[arg(long)]
    pub policy: Option<PolicyKind>,
    #[arg(long, value_name = "PATH")]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Scenario file or directory.
    #[arg(long, value_name = "PATH")]
    pub scenarios: PathBuf,
    /// Scenarios for periodic evaluation.
    #[arg(long, value_name = "PATH")]
    pub eval_scenarios: Option<PathBuf>,
    #[arg(long)]
    pub episodes: Option<usize>,
    /// g-sac-cog, g-sac-nocog or s-sac.
    #[arg(long)]
    pub variant: Option<Variant>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Scenario file or directory.
    #[arg(long, value_name = "PATH")]
    pub scenarios: PathBuf,
    /// replay (pedestrian-model evaluation), goal-seeker, random or checkpoint.
    #[arg(long)]
    pub policy: Option<PolicyKind>,
    #[arg(long, value_name = "PATH")]
    pub checkpoint: Option<PathBuf>,
    /// Overrides every scenario's pedestrian model.
    #[arg(long)]
    pub model: Option<PedestrianModelKind>,
    /// Calibration result whose parameters replace the configured ones.
    #[arg(long, value_name = "PATH")]
    pub params: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Recorded scenarios: scenario files or trajectory CSVs, or a directory of either.
    #[arg(long, value_name = "PATH")]
    pub truth: PathBuf,
    /// Calibration spec (JSON); defaults to the [calibrate] config section.
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PedestrianModelKind>,
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// NDJSON episode log.
    #[arg(long, value_name = "PATH")]
    pub log: PathBuf,
    /// Time-series panels to add, comma separated: speed, accel, heading.
    #[arg(long, value_delimiter = ',')]
    pub panels: Option<Vec<Panel>>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Trajectory CSV.
    #[arg(long, value_name = "PATH")]
    pub csv: PathBuf,
    #[arg(long, default_value = "cr_sfm")]
    pub model: PedestrianModelKind,
    /// Scenario id (defaults to the file stem).
    #[arg(long)]
    pub id: Option<String>,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Context<'a> {
    config: ToolkitConfig,
    seed: u64,
    out: &'a Path,
    quiet: bool,
}

impl Context<'_> {
    fn say(&self, message: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", message.as_ref());
        }
    }

    fn write(&self, relative: impl AsRef<Path>, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out.join(relative);
        write_file(&path, bytes)?;
        Ok(path)
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => ToolkitConfig::load(path)?,
        None => ToolkitConfig::default(),
    };
    let seed = cli.seed.unwrap_or(config.seed);
    let ctx = Context { config, seed, out: &cli.out_dir, quiet: cli.quiet };
    match &cli.command {
        Command::Generate(a) => generate(&ctx, a),
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Train(a) => train(&ctx, a),
        Command::Eval(a) => eval(&ctx, a),
        Command::Calibrate(a) => calibrate_cmd(&ctx, a),
        Command::Render(a) => render(&ctx, a),
        Command::Ingest(a) => ingest(&ctx, a),
    }
}

fn generate(ctx: &Context, a: &GenerateArgs) -> Result<()> {
    let fam: Family = a.family.parse()?;
    let mut gen = ctx.config.generate.clone();
    if let Some(m) = a.model {
        gen.model = m;
    }
    if let Some(f) = a.split {
        gen.train_fraction = f;
    }
    gen.validate()?;
    let seed = seeds::derive(ctx.seed, seeds::GENERATE);
    let split_sets = matches!(fam, Family::Crossing | Family::Recorded);
    let count = a.count.unwrap_or(if split_sets { gen.count } else { gen.family_size });
    let scenarios = family(fam, count, seed, &gen, &ctx.config.env.model)?;
    if split_sets {
        let root = if fam == Family::Crossing { ctx.out.join("scenarios") } else { ctx.out.join("scenarios").join(&a.family) };
        let (train, test) = split(scenarios, gen.train_fraction);
        for (dir, set) in [("train", &train), ("test", &test)] {
            for s in set {
                write_scenario(&root.join(dir).join(format!("{}.json", s.id)), s)?;
            }
        }
        ctx.say(format!("wrote {} training and {} test scenarios to {}", train.len(), test.len(), root.display()));
    } else {
        for s in &scenarios {
            write_scenario(&ctx.out.join("scenarios").join(&a.family).join(format!("{}.json", s.id)), s)?;
        }
        ctx.say(format!("wrote {} {} scenarios to {}", scenarios.len(), a.family, ctx.out.join("scenarios").join(&a.family).display()));
    }
    Ok(())
}

/// The scenario as run from the command line: model override applied and
/// its noise seed mixed with the master seed.
fn prepared(ctx: &Context, mut s: Scenario, model: Option<PedestrianModelKind>) -> Scenario {
    if let Some(m) = model.or(ctx.config.simulate.model) {
        s.model = m;
    }
    s.seed = seeds::derive(ctx.seed, s.seed);
    s
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::from_json(&read_text(path)?).map_err(|e| ShellError::Validation(format!("{}: {e}", path.display())))
}

/// Loads the actor of a checkpoint, taking the variant whose architecture
/// hash matches (the configured variant is tried first).
fn load_actor(ctx: &Context, path: &Path) -> Result<(Actor, Variant)> {
    let ckpt = load_checkpoint(path)?;
    let mut candidates = vec![ctx.config.sac.variant];
    candidates.extend(Variant::ALL.iter().copied().filter(|v| *v != ctx.config.sac.variant));
    for variant in candidates {
        let config = SacConfig { variant, ..ctx.config.sac.clone() };
        if config.architecture_hash() == ckpt.config_hash {
            let actor = SacAgent::actor_from_checkpoint(&config, &ckpt, &mut ChaCha8Rng::seed_from_u64(0))?;
            return Ok((actor, variant));
        }
    }
    Err(ShellError::Validation(format!("{}: checkpoint architecture does not match the configured network", path.display())))
}

fn policy_of(ctx: &Context, policy: Option<PolicyKind>, checkpoint: &Option<PathBuf>) -> Result<PolicyKind> {
    let p = policy.unwrap_or(if checkpoint.is_some() { PolicyKind::Checkpoint } else { ctx.config.simulate.policy });
    match (p, checkpoint) {
        (PolicyKind::Checkpoint, None) => Err(ShellError::Validation("policy 'checkpoint' needs --checkpoint".into())),
        (p, Some(_)) if p != PolicyKind::Checkpoint => Err(ShellError::Validation("--checkpoint requires policy 'checkpoint'".into())),
        (p, _) => Ok(p),
    }
}

fn run_with_policy(ctx: &Context, scenarios: &[Scenario], policy: PolicyKind, checkpoint: &Option<PathBuf>, stream: u64) -> Result<Vec<EpisodeLog>> {
    let env = ctx.config.env;
    match policy {
        PolicyKind::Replay => scenarios
            .iter()
            .map(|s| Ok(cogrisk_core::run_replay(s, &env.model, s.max_steps)?))
            .collect(),
        PolicyKind::GoalSeeker => Ok(evaluate(scenarios, &env, &mut GoalSeeker { cruise_speed: ctx.config.simulate.cruise_speed })?),
        PolicyKind::Random => {
            let mut driver = RandomDriver(ChaCha8Rng::seed_from_u64(seeds::derive(ctx.seed, stream)));
            Ok(evaluate(scenarios, &env, &mut driver)?)
        }
        PolicyKind::Checkpoint => {
            let path = checkpoint.as_ref().expect("checked by policy_of");
            let (actor, variant) = load_actor(ctx, path)?;
            let mut driver = ActorDriver { actor: &actor, variant, rng: None };
            scenarios.iter().map(|s| Ok(run_episode(s, &env, &mut driver as &mut dyn Driver)?)).collect()
        }
    }
}

fn simulate(ctx: &Context, a: &SimulateArgs) -> Result<()> {
    let scenario = prepared(ctx, read_scenario(&a.scenario)?, a.model);
    let policy = policy_of(ctx, a.policy, &a.checkpoint)?;
    let log = run_with_policy(ctx, std::slice::from_ref(&scenario), policy, &a.checkpoint, seeds::SIMULATE)?.remove(0);
    let path = ctx.write(Path::new("logs").join(format!("{}.ndjson", log.scenario_id)), ndjson::write_log(&log).as_bytes())?;
    ctx.write(Path::new("logs").join(format!("{}.csv", log.scenario_id)), trajectory_csv::write_trajectories(&trajectory_csv::from_log(&log)).as_bytes())?;
    ctx.say(format!("{}: {} after {} steps; log written to {}", log.scenario_id, log.outcome.name(), log.steps.len() - 1, path.display()));
    Ok(())
}

fn load_set(path: &Path, ctx: &Context, model: Option<PedestrianModelKind>) -> Result<Vec<Scenario>> {
    Ok(read_scenario_set(path)?.into_iter().map(|s| prepared(ctx, s, model)).collect())
}

fn train(ctx: &Context, a: &TrainArgs) -> Result<()> {
    let mut config = ctx.config.sac.clone();
    if let Some(e) = a.episodes {
        config.episodes = e;
    }
    if let Some(v) = a.variant {
        config.variant = v;
    }
    config.validate()?;
    let train_set = load_set(&a.scenarios, ctx, None)?;
    if train_set.is_empty() {
        return Err(ShellError::Validation(format!("{}: no scenarios to train on", a.scenarios.display())));
    }
    let eval_set = match &a.eval_scenarios {
        Some(p) => load_set(p, ctx, None)?,
        None => Vec::new(),
    };
    let quiet = ctx.quiet;
    let mut progress = |row: &TrainLogRow| {
        if !quiet && (row.eval_success_rate.is_some() || (row.episode + 1) % 50 == 0) {
            eprintln!("episode {:>6}  return {:>9.3}  {}", row.episode + 1, row.episode_return, row.outcome.name());
        }
    };
    let result = train_with(&train_set, &eval_set, &ctx.config.env, config, seeds::derive(ctx.seed, seeds::TRAIN), &mut progress)?;
    let mut csv = String::from(TrainLogRow::CSV_HEADER);
    csv.push('\n');
    for row in &result.log {
        csv.push_str(&row.csv_row());
        csv.push('\n');
    }
    ctx.write("train_log.csv", csv.as_bytes())?;
    let path = ctx.write("checkpoint.json", result.agent.checkpoint().to_json().as_bytes())?;
    ctx.say(format!("trained {} episodes ({} updates); checkpoint written to {}", result.log.len(), result.agent.updates(), path.display()));
    Ok(())
}

fn write_report(ctx: &Context, report: &MetricsReport, logs: &[EpisodeLog]) -> Result<()> {
    for (i, log) in logs.iter().enumerate() {
        ctx.write(Path::new("eval_logs").join(format!("{i:04}-{}.ndjson", log.scenario_id)), ndjson::write_log(log).as_bytes())?;
    }
    ctx.write("report.json", to_json_pretty(report).as_bytes())?;
    ctx.write("report.csv", format!("{}\n{}\n", MetricsReport::CSV_HEADER, report.csv_row()).as_bytes())?;
    ctx.say(format!(
        "{} episodes: success {:.3}, collision {:.3}, timeout {:.3}{}",
        report.episodes,
        report.success_rate,
        report.collision_rate,
        report.timeout_rate,
        report.ade.map(|a| format!(", ADE {a:.4}, FDE {:.4}, CR {:.3}", report.fde.unwrap_or(0.0), report.cr.unwrap_or(0.0))).unwrap_or_default()
    ));
    Ok(())
}

fn eval(ctx: &Context, a: &EvalArgs) -> Result<()> {
    let scenarios = load_set(&a.scenarios, ctx, a.model)?;
    if scenarios.is_empty() {
        return Err(ShellError::Validation(format!("{}: scenario set is empty", a.scenarios.display())));
    }
    let policy = policy_of(ctx, a.policy, &a.checkpoint)?;
    let mut params = ctx.config.env.model;
    if let Some(p) = &a.params {
        let result: crate::calibrate::CalibrationResult =
            serde_json::from_str(&read_text(p)?).map_err(|e| ShellError::parse(p.display(), e.to_string()))?;
        params = result.params;
        params.validate()?;
    }
    if policy == PolicyKind::Replay {
        let model = scenarios[0].model;
        if scenarios.iter().any(|s| s.model != model) {
            return Err(ShellError::Validation("pedestrian-model evaluation needs one model across the set; pass --model".into()));
        }
        let (report, logs) = pedestrian_report(&scenarios, model, &params)?;
        return write_report(ctx, &report, &logs);
    }
    let scoped = Context { config: ToolkitConfig { env: cogrisk_core::EnvConfig { model: params, ..ctx.config.env }, ..ctx.config.clone() }, ..*ctx };
    let logs = run_with_policy(&scoped, &scenarios, policy, &a.checkpoint, seeds::EVAL)?;
    let report = cogrisk_core::metrics::av_report(&logs)?;
    write_report(ctx, &report, &logs)
}

/// Scenarios with recordings: scenario files as they are, trajectory CSVs
/// through ingestion.
fn load_truth(path: &Path, model: PedestrianModelKind) -> Result<Vec<Scenario>> {
    let paths: Vec<PathBuf> = if path.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| ShellError::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json" || e == "csv"))
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    paths
        .iter()
        .map(|p| {
            if p.extension().is_some_and(|e| e == "csv") {
                let set = trajectory_csv::parse_trajectories(&read_text(p)?, &p.display().to_string())?;
                let stem = p.file_stem().map_or("ingested".into(), |s| s.to_string_lossy().into_owned());
                trajectory_csv::to_scenario(&set, &stem, model, 0)
            } else {
                read_scenario(p)
            }
        })
        .collect()
}

fn calibrate_cmd(ctx: &Context, a: &CalibrateArgs) -> Result<()> {
    let mut spec = match &a.spec {
        Some(p) => serde_json::from_str::<CalibrationSpec>(&read_text(p)?).map_err(|e| ShellError::parse(p.display(), e.to_string()))?,
        None => CalibrationSpec {
            model: PedestrianModelKind::CrSfm,
            parameters: ctx.config.calibrate.parameters.clone(),
            budget: ctx.config.calibrate.budget,
            seed: None,
            base: ctx.config.env.model,
        },
    };
    if let Some(m) = a.model {
        spec.model = m;
    }
    if let Some(b) = a.budget {
        spec.budget = b;
    }
    let truth = load_truth(&a.truth, spec.model)?;
    if truth.is_empty() {
        return Err(ShellError::Validation(format!("{}: no recorded scenarios", a.truth.display())));
    }
    let result = calibrate(&spec, &truth, seeds::derive(ctx.seed, seeds::CALIBRATE))?;
    ctx.write(Path::new("calibration").join("trials.csv"), result.trials_csv().as_bytes())?;
    let path = ctx.write(Path::new("calibration").join("best.json"), to_json_pretty(&result).as_bytes())?;
    ctx.say(format!("{}: best ADE {:.4} at trial {} of {}; written to {}", spec.model.name(), result.best_ade, result.best_trial, result.trials.len(), path.display()));
    Ok(())
}

fn render(ctx: &Context, a: &RenderArgs) -> Result<()> {
    let log = ndjson::read_log(&read_text(&a.log)?, &a.log.display().to_string())?;
    let mut options = ctx.config.render.clone();
    if let Some(p) = &a.panels {
        options.panels = p.clone();
    }
    let stem = a.log.file_stem().map_or("episode".into(), |s| s.to_string_lossy().into_owned());
    let path = ctx.write(format!("{stem}.svg"), render_svg(&log, &options).as_bytes())?;
    ctx.say(format!("wrote {}", path.display()));
    Ok(())
}

fn ingest(ctx: &Context, a: &IngestArgs) -> Result<()> {
    let set = trajectory_csv::parse_trajectories(&read_text(&a.csv)?, &a.csv.display().to_string())?;
    let id = a.id.clone().unwrap_or_else(|| a.csv.file_stem().map_or("ingested".into(), |s| s.to_string_lossy().into_owned()));
    let scenario = trajectory_csv::to_scenario(&set, &id, a.model, ctx.seed)?;
    let path = ctx.out.join("scenarios").join(format!("{id}.json"));
    write_scenario(&path, &scenario)?;
    ctx.say(format!("{id}: {} agents over {} steps; written to {}", scenario.agents.len(), set.times.len(), path.display()));
    Ok(())
}
