//! `modbot` command-line tool.
//!
//! Exit codes: 0 success, 1 I/O or file format, 2 usage, 3 domain error
//! (illegal design, incompatible inputs), 4 numeric failure.

use std::collections::HashSet;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modbot::config::{derive_seed, RunConfig};
use modbot::control::{self, ActuationPlan, ControlError, Environment, Objective, TaskSpec};
use modbot::datagen;
use modbot::design::{self, CanonicalKey, DesignRecord, GridDesign};
use modbot::io::{read_jsonl, to_json_document, write_jsonl, FormatError, Header};
use modbot::mesh::build_mesh;
use modbot::metrics::{self, GenerationRecord, OutcomeRow, Replay, Simulated};
use modbot::render;
use modbot::sim::{self, Idle, Signals, SimError};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "modbot", version, about = "Soft modular robot design, simulation and evaluation")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set sim.dt=0.002`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample random connected designs.
    GenConfigs {
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(u32, u32)>,
        #[arg(long)]
        count: usize,
        #[arg(long, value_parser = parse_range)]
        blocks: Option<(usize, usize)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Optimize a controller for one design.
    Optimize {
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Trajectory summary destination (default: stdout).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Roll out a design under a controller, optionally dumping frames.
    Simulate {
        #[command(flatten)]
        task: TaskArgs,
        #[arg(long)]
        design: PathBuf,
        /// Controller file; the robot stays idle without one.
        #[arg(long)]
        controller: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        dump_frames: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        stride: usize,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Synthesize a training dataset and, optionally, prompt files.
    Dataset {
        #[arg(long)]
        configs: usize,
        #[arg(long, value_delimiter = ',', default_value = "uni,back_forth,downstairs")]
        tasks: Vec<Objective>,
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(u32, u32)>,
        #[arg(long, value_parser = parse_range)]
        blocks: Option<(usize, usize)>,
        /// Optimizer iterations per record.
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        prompts: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        clm: usize,
        #[arg(long, default_value_t = 0)]
        compare: usize,
    },
    /// Score a generations file.
    Evaluate {
        #[arg(long)]
        generations: PathBuf,
        /// Training dataset whose designs count as seen.
        #[arg(long)]
        training: Option<PathBuf>,
        /// Recorded per-design outcomes to use instead of simulating.
        #[arg(long)]
        outcomes: Option<PathBuf>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit alternative assembly orders of a design.
    Augment {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct TaskArgs {
    #[arg(long, default_value = "uni")]
    task: Objective,
    /// `flat_plane`, `stairs` or `stairs:WIDTH,HEIGHT,N,GAP`; defaults to
    /// the task's natural environment.
    #[arg(long)]
    terrain: Option<Environment>,
    #[arg(long)]
    distance: Option<f64>,
}

impl TaskArgs {
    fn spec(&self) -> Result<TaskSpec, CliError> {
        let env = self.terrain.unwrap_or(match self.task {
            Objective::Downstairs => Environment::Stairs(Default::default()),
            _ => Environment::FlatPlane,
        });
        let spec = TaskSpec {
            distance_req: self.distance,
            ..TaskSpec::new(self.task, env)
        };
        spec.check().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(spec)
    }
}

fn parse_grid(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WxH")?;
    let w = w.trim().parse().map_err(|_| "bad width")?;
    let h = h.trim().parse().map_err(|_| "bad height")?;
    Ok((w, h))
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or("expected MIN..MAX")?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a = a.trim().parse().map_err(|_| "bad minimum")?;
    let b = b.trim().parse().map_err(|_| "bad maximum")?;
    Ok((a, b))
}

#[derive(Debug)]
enum CliError {
    Io(String),
    Usage(String),
    Domain(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Io(m) => ("io", m),
            CliError::Usage(m) => ("usage", m),
            CliError::Domain(m) => ("domain", m),
            CliError::Numeric(m) => ("numeric", m),
        };
        json!({"error": kind, "message": message, "exit_code": self.code()})
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn format_err(path: &Path) -> impl Fn(FormatError) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::NonFiniteState { .. } | SimError::NonFiniteGradient { .. } => CliError::Numeric(e.to_string()),
            SimError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            SimError::SignalLength { .. } => CliError::Domain(e.to_string()),
        }
    }
}

impl From<ControlError> for CliError {
    fn from(e: ControlError) -> Self {
        match e {
            ControlError::BudgetZero => CliError::Usage(e.to_string()),
            ControlError::NonFiniteGradient { .. } => CliError::Numeric(e.to_string()),
            ControlError::Simulation { source, .. } => source.into(),
            ControlError::Task(_) => CliError::Domain(e.to_string()),
        }
    }
}

fn resolve_config(global: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &global.config {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        cfg.apply_file(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    for kv in &global.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn write_rows<T: serde::Serialize>(path: &Path, header: &Header, rows: &[T]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, header, rows).map_err(io_err(path))?;
    write_file(path, &buf)
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    Ok(read_jsonl(BufReader::new(file)).map_err(format_err(path))?.1)
}

fn emit(path: Option<&Path>, doc: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, doc.as_bytes()),
        None => std::io::stdout()
            .write_all(doc.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn load_design(path: &Path) -> Result<GridDesign, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let design = design::parse_design(&text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    let verdict = design::validate(&design, None);
    if !verdict.legal {
        return Err(CliError::Domain(format!("{}: illegal design: {verdict}", path.display())));
    }
    Ok(design)
}

fn load_controller(path: &Path) -> Result<ActuationPlan, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if let Some(map) = value.as_object_mut() {
        map.remove("header");
    }
    let plan: ActuationPlan =
        serde_json::from_value(value).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    plan.check().map_err(|e| CliError::Domain(e.to_string()))?;
    Ok(plan)
}

fn training_keys(path: &Path) -> Result<HashSet<CanonicalKey>, CliError> {
    let rows: Vec<Value> = read_rows(path)?;
    let bad = |line: usize, m: &str| CliError::Io(format!("{}: row {line}: {m}", path.display()));
    let mut keys = HashSet::new();
    for (i, row) in rows.iter().enumerate() {
        if let Some(hex) = row.get("canonical_key").and_then(Value::as_str) {
            keys.insert(CanonicalKey::from_hex(hex).ok_or_else(|| bad(i + 1, "bad canonical key"))?);
            continue;
        }
        let text = row
            .get("design_text")
            .or_else(|| row.get("text"))
            .and_then(Value::as_str)
            .ok_or_else(|| bad(i + 1, "no design"))?;
        if let Ok(d) = design::parse_design(text) {
            if let Ok(k) = design::canonical_key(&d) {
                keys.insert(k);
            }
        }
    }
    Ok(keys)
}

fn width_of(design: &GridDesign) -> f64 {
    design.bounds().map_or(0, |(lo, hi)| hi.0 - lo.0 + 1) as f64
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = resolve_config(&cli.global)?;
    match cli.command {
        Command::GenConfigs { grid, count, blocks, out } => {
            if let Some(g) = grid {
                cfg.dataset.grid = g;
            }
            if let Some((lo, hi)) = blocks {
                cfg.dataset.min_blocks = lo;
                cfg.dataset.max_blocks = hi;
            }
            let rows = (0..count)
                .map(|i| {
                    let d = design::sample_design(
                        cfg.dataset.grid,
                        cfg.dataset.min_blocks..=cfg.dataset.max_blocks,
                        derive_seed(cfg.seed, 0, i as u64),
                    )
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                    Ok(DesignRecord {
                        id: format!("d{i}"),
                        text: design::serialize(&d).expect("sampled designs are legal"),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            write_rows(&out, &Header::new("gen-configs", &cfg), &rows)
        }
        Command::Optimize { task, design, iters, out, summary } => {
            if let Some(k) = iters {
                cfg.budget = k;
            }
            let spec = task.spec()?;
            let d = load_design(&design)?;
            let mesh = build_mesh(&d, &cfg.material).map_err(|e| CliError::Domain(e.to_string()))?;
            let terrain = spec.environment.terrain(width_of(&d));
            let best = control::optimize(&mesh, &spec, &terrain, cfg.seed, cfg.budget, &cfg.sim, &cfg.optimizer)?;
            let header = Header::new("optimize", &cfg);
            write_file(&out, to_json_document(&header, &best.plan).as_bytes())?;
            let body = json!({
                "initial_loss": best.initial_loss,
                "best_loss": best.best_loss,
                "best_iteration": best.best_iteration,
                "trajectory": render::summarize(&best.trajectory, 64),
            });
            emit(summary.as_deref(), &to_json_document(&header, &body))
        }
        Command::Simulate { task, design, controller, steps, dump_frames, stride, summary } => {
            let spec = task.spec()?;
            let d = load_design(&design)?;
            let mesh = build_mesh(&d, &cfg.material).map_err(|e| CliError::Domain(e.to_string()))?;
            let terrain = spec.environment.terrain(width_of(&d));
            let plan = controller.as_deref().map(load_controller).transpose()?;
            let idle = Idle(mesh.n_actuators);
            let signals: &dyn Signals = match &plan {
                Some(p) => p,
                None => &idle,
            };
            let steps = steps.unwrap_or(cfg.sim.n_steps);
            let keep = if dump_frames.is_some() { stride.max(1) } else { 0 };
            let mut traj = sim::rollout_for(&mesh, &terrain, signals, &cfg.sim, steps, keep)?;
            traj.loss = control::loss_for(&spec).value(&traj.com_track);
            traj.completion_step = control::completion_step(&spec, &terrain, &traj.com_track);
            let mut frames = 0;
            if let Some(dir) = &dump_frames {
                fs::create_dir_all(dir).map_err(io_err(dir))?;
                for (name, svg) in render::render_frames(&mesh, &traj, signals, &terrain, cfg.sim.dt, steps) {
                    write_file(&dir.join(name), svg.as_bytes())?;
                    frames += 1;
                }
            }
            let body = json!({
                "steps": steps,
                "frames": frames,
                "min_clearance": traj.min_clearance,
                "trajectory": render::summarize(&traj, 64),
            });
            emit(summary.as_deref(), &to_json_document(&Header::new("simulate", &cfg), &body))
        }
        Command::Dataset { configs, tasks, grid, blocks, iters, out, prompts, clm, compare } => {
            if let Some(g) = grid {
                cfg.dataset.grid = g;
            }
            if let Some((lo, hi)) = blocks {
                cfg.dataset.min_blocks = lo;
                cfg.dataset.max_blocks = hi;
            }
            if let Some(k) = iters {
                cfg.dataset.budget = k;
            }
            let records = datagen::build_dataset(configs, &tasks, &cfg).map_err(|e| CliError::Usage(e.to_string()))?;
            let header = Header::new("dataset", &cfg);
            write_rows(&out, &header, &records)?;
            if let Some(p) = prompts {
                let rows = datagen::build_prompts(&records, clm, compare, cfg.seed);
                write_rows(&p, &header, &rows)?;
            }
            Ok(())
        }
        Command::Evaluate { generations, training, outcomes, iters, out } => {
            if let Some(k) = iters {
                cfg.budget = k;
            }
            let records: Vec<GenerationRecord> = read_rows(&generations)?;
            let keys = match &training {
                Some(p) => training_keys(p)?,
                None => HashSet::new(),
            };
            let report = match &outcomes {
                Some(p) => metrics::evaluate(&records, &keys, &Replay::new(read_rows::<OutcomeRow>(p)?)),
                None => metrics::evaluate(&records, &keys, &Simulated(&cfg)),
            }
            .map_err(|e| CliError::Domain(e.to_string()))?;
            emit(out.as_deref(), &to_json_document(&Header::new("evaluate", &cfg), &report))
        }
        Command::Augment { design, k, out } => {
            let d = load_design(&design)?;
            let rows: Vec<DesignRecord> = design::bfs_augment(&d, k, cfg.seed)
                .map_err(|e| CliError::Domain(e.to_string()))?
                .into_iter()
                .enumerate()
                .map(|(i, s)| DesignRecord {
                    id: format!("a{i}"),
                    text: s.to_string(),
                })
                .collect();
            write_rows(&out, &Header::new("augment", &cfg), &rows)
        }
    }
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MODBOT_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("MODBOT_WORKERS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_workers().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code())
        }
    }
}

