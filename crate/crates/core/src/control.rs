//! Open-loop actuation plans, task losses and completion predicates, and
//! gradient-based gait optimization.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{RobotMesh, Vec2};
use crate::sim::{self, DifferentiableSignals, SimConfig, SimError, Signals, Terrain, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinusoidParams {
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub level: f64,
}

/// `u_i(t) = clamp(bias_i + amplitude_i * sin(omega * t + phase_i), 0, 1)`
/// or a cyclic per-actuator schedule of constant levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActuationPlan {
    Sinusoid {
        parameters: SinusoidParams,
        omega: f64,
    },
    PiecewiseConstant {
        schedule: Vec<Vec<Segment>>,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("sinusoid parameter vectors have mismatched lengths")]
    Shape,
    #[error("actuator {actuator} has a segment with non-positive duration")]
    Duration { actuator: usize },
}

impl ActuationPlan {
    pub fn sinusoid(amplitude: Vec<f64>, phase: Vec<f64>, bias: Vec<f64>, omega: f64) -> Self {
        ActuationPlan::Sinusoid {
            parameters: SinusoidParams {
                amplitude,
                phase,
                bias,
            },
            omega,
        }
    }

    pub fn check(&self) -> Result<(), PlanError> {
        match self {
            ActuationPlan::Sinusoid { parameters: p, .. } => {
                if p.amplitude.len() != p.phase.len() || p.amplitude.len() != p.bias.len() {
                    return Err(PlanError::Shape);
                }
            }
            ActuationPlan::PiecewiseConstant { schedule } => {
                for (actuator, segs) in schedule.iter().enumerate() {
                    if segs.iter().any(|s| !(s.duration > 0.0)) {
                        return Err(PlanError::Duration { actuator });
                    }
                }
            }
        }
        Ok(())
    }

    /// Parameters flattened as `[amplitudes.., phases.., biases..]`.
    pub fn flat_params(&self) -> Vec<f64> {
        match self {
            ActuationPlan::Sinusoid { parameters: p, .. } => {
                [p.amplitude.as_slice(), &p.phase, &p.bias].concat()
            }
            ActuationPlan::PiecewiseConstant { .. } => Vec::new(),
        }
    }

    fn set_flat_params(&mut self, flat: &[f64]) {
        if let ActuationPlan::Sinusoid { parameters: p, .. } = self {
            let n = p.amplitude.len();
            p.amplitude.copy_from_slice(&flat[..n]);
            p.phase.copy_from_slice(&flat[n..2 * n]);
            p.bias.copy_from_slice(&flat[2 * n..]);
        }
    }
}

impl Signals for ActuationPlan {
    fn n_actuators(&self) -> usize {
        match self {
            ActuationPlan::Sinusoid { parameters, .. } => parameters.amplitude.len(),
            ActuationPlan::PiecewiseConstant { schedule } => schedule.len(),
        }
    }

    fn fill(&self, t: f64, out: &mut [f64]) {
        match self {
            ActuationPlan::Sinusoid { parameters: p, omega } => {
                for (i, u) in out.iter_mut().enumerate() {
                    *u = (p.bias[i] + p.amplitude[i] * (omega * t + p.phase[i]).sin()).clamp(0.0, 1.0);
                }
            }
            ActuationPlan::PiecewiseConstant { schedule } => {
                for (u, segs) in out.iter_mut().zip(schedule) {
                    let period: f64 = segs.iter().map(|s| s.duration).sum();
                    if segs.is_empty() || !(period > 0.0) {
                        *u = 0.0;
                        continue;
                    }
                    let mut local = t.rem_euclid(period);
                    let mut level = segs[segs.len() - 1].level;
                    for s in segs {
                        if local < s.duration {
                            level = s.level;
                            break;
                        }
                        local -= s.duration;
                    }
                    *u = level.clamp(0.0, 1.0);
                }
            }
        }
    }
}

impl DifferentiableSignals for ActuationPlan {
    fn n_params(&self) -> usize {
        match self {
            ActuationPlan::Sinusoid { parameters, .. } => 3 * parameters.amplitude.len(),
            ActuationPlan::PiecewiseConstant { .. } => 0,
        }
    }

    fn accumulate_grad(&self, t: f64, u_bar: &[f64], grad: &mut [f64]) {
        let ActuationPlan::Sinusoid { parameters: p, omega } = self else {
            return;
        };
        let n = p.amplitude.len();
        for i in 0..n {
            if u_bar[i] == 0.0 {
                continue;
            }
            let arg = omega * t + p.phase[i];
            let (s, c) = arg.sin_cos();
            let raw = p.bias[i] + p.amplitude[i] * s;
            // zero derivative where the clamp is active
            if raw <= 0.0 || raw >= 1.0 {
                continue;
            }
            grad[i] += u_bar[i] * s;
            grad[n + i] += u_bar[i] * p.amplitude[i] * c;
            grad[2 * n + i] += u_bar[i];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Objective {
    #[serde(rename = "uni")]
    Uni,
    #[serde(rename = "back_forth")]
    BackForth,
    #[serde(rename = "downstairs")]
    Downstairs,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::Uni, Objective::BackForth, Objective::Downstairs];

    pub fn name(self) -> &'static str {
        match self {
            Objective::Uni => "uni",
            Objective::BackForth => "back_forth",
            Objective::Downstairs => "downstairs",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = TaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "uni" | "unidirectional" | "uni_directional" => Ok(Objective::Uni),
            "back_forth" | "back_and_forth" => Ok(Objective::BackForth),
            "downstairs" | "stairs_down" => Ok(Objective::Downstairs),
            _ => Err(TaskError::UnknownObjective(s.to_owned())),
        }
    }
}

/// Stair geometry relative to the robot: the first drop sits `gap` block
/// lengths to the right of the robot's initial right edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StairParams {
    pub step_width: f64,
    pub step_height: f64,
    pub n_steps: u32,
    pub gap: f64,
}

impl Default for StairParams {
    fn default() -> Self {
        StairParams {
            step_width: 1.0,
            step_height: 0.2,
            n_steps: 2,
            gap: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Environment {
    FlatPlane,
    Stairs(StairParams),
}

impl Environment {
    /// Concrete terrain for a robot whose rest pose spans `robot_width`.
    pub fn terrain(&self, robot_width: f64) -> Terrain {
        match *self {
            Environment::FlatPlane => Terrain::Flat,
            Environment::Stairs(p) => Terrain::Stairs {
                step_width: p.step_width,
                step_height: p.step_height,
                n_steps: p.n_steps,
                x_start: robot_width + p.gap,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Environment::FlatPlane => "flat_plane",
            Environment::Stairs(_) => "stairs",
        }
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Environment::FlatPlane => f.write_str("flat_plane"),
            Environment::Stairs(p) => write!(
                f,
                "stairs:{},{},{},{}",
                p.step_width, p.step_height, p.n_steps, p.gap
            ),
        }
    }
}

impl From<Environment> for String {
    fn from(e: Environment) -> String {
        e.to_string()
    }
}

impl TryFrom<String> for Environment {
    type Error = TaskError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for Environment {
    type Err = TaskError;

    /// `flat_plane`, `stairs`, or `stairs:WIDTH,HEIGHT,N,GAP`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TaskError::UnknownEnvironment(s.to_owned());
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "flat_plane" | "flat" | "plane" => return Ok(Environment::FlatPlane),
            "stairs" => return Ok(Environment::Stairs(StairParams::default())),
            _ => {}
        }
        let rest = t.strip_prefix("stairs:").ok_or_else(bad)?;
        let v: Vec<&str> = rest.split(',').map(str::trim).collect();
        let [w, h, n, gap] = v.as_slice() else {
            return Err(bad());
        };
        let p = StairParams {
            step_width: w.parse().map_err(|_| bad())?,
            step_height: h.parse().map_err(|_| bad())?,
            n_steps: n.parse().map_err(|_| bad())?,
            gap: gap.parse().map_err(|_| bad())?,
        };
        if !(p.step_width > 0.0) || p.step_height < 0.0 || p.n_steps == 0 {
            return Err(bad());
        }
        Ok(Environment::Stairs(p))
    }
}

/// Distance requirement used when a task does not state one.
pub const DEFAULT_DISTANCE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub objective: Objective,
    pub environment: Environment,
    pub distance_req: Option<f64>,
    pub min_blocks: Option<usize>,
    pub max_blocks: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TaskError {
    #[error("unknown task objective {0:?}")]
    UnknownObjective(String),
    #[error("unknown environment {0:?}")]
    UnknownEnvironment(String),
    #[error("objective {objective} cannot run on {environment}")]
    Mismatch {
        objective: Objective,
        environment: &'static str,
    },
    #[error("distance requirement must be positive")]
    Distance,
    #[error("block bounds are inverted")]
    Bounds,
}

impl TaskSpec {
    pub fn new(objective: Objective, environment: Environment) -> Self {
        TaskSpec {
            objective,
            environment,
            distance_req: None,
            min_blocks: None,
            max_blocks: None,
        }
    }

    pub fn check(&self) -> Result<(), TaskError> {
        let stairs = matches!(self.environment, Environment::Stairs(_));
        if stairs != (self.objective == Objective::Downstairs) {
            return Err(TaskError::Mismatch {
                objective: self.objective,
                environment: self.environment.kind(),
            });
        }
        if let Some(d) = self.distance_req {
            if !(d > 0.0) {
                return Err(TaskError::Distance);
            }
        }
        if let (Some(lo), Some(hi)) = (self.min_blocks, self.max_blocks) {
            if lo > hi {
                return Err(TaskError::Bounds);
            }
        }
        Ok(())
    }

    pub fn distance(&self) -> f64 {
        self.distance_req.unwrap_or(DEFAULT_DISTANCE)
    }

    pub fn has_block_bounds(&self) -> bool {
        self.min_blocks.is_some() || self.max_blocks.is_some()
    }

    pub fn blocks_within_bounds(&self, n: usize) -> bool {
        self.min_blocks.map_or(true, |lo| n >= lo) && self.max_blocks.map_or(true, |hi| n <= hi)
    }
}

/// Differentiable surrogate loss for an objective over a track ending at
/// step `T = len - 1`.
#[derive(Debug, Clone, Copy)]
pub struct TaskLoss(pub Objective);

pub fn loss_for(task: &TaskSpec) -> TaskLoss {
    TaskLoss(task.objective)
}

impl sim::TrackLoss for TaskLoss {
    fn evaluate(&self, com: &[Vec2]) -> (f64, Vec<(usize, Vec2)>) {
        let end = com.len() - 1;
        let x0 = com[0][0];
        match self.0 {
            Objective::Uni | Objective::Downstairs => {
                (-(com[end][0] - x0), vec![(0, [1.0, 0.0]), (end, [-1.0, 0.0])])
            }
            Objective::BackForth => {
                let mid = end / 2;
                let out = com[mid][0] - x0;
                let back = com[end][0] - x0;
                // mid == end only for a one-step track
                let mut partials = vec![(0, [1.0 - 2.0 * back, 0.0]), (mid, [-1.0, 0.0])];
                partials.push((end, [2.0 * back, 0.0]));
                (-out + back * back, partials)
            }
        }
    }
}

impl TaskLoss {
    pub fn value(&self, com: &[Vec2]) -> f64 {
        sim::TrackLoss::evaluate(self, com).0
    }
}

/// First step at which the task's completion predicate holds.
pub fn completion_step(task: &TaskSpec, terrain: &Terrain, com: &[Vec2]) -> Option<usize> {
    let x0 = com.first()?[0];
    let req = task.distance();
    match task.objective {
        Objective::Uni => com.iter().position(|c| c[0] - x0 >= req),
        Objective::BackForth => {
            let reached = com.iter().position(|c| c[0] - x0 >= req)?;
            com.iter()
                .enumerate()
                .skip(reached + 1)
                .find(|(_, c)| (c[0] - x0).abs() <= 0.5)
                .map(|(n, _)| n)
        }
        Objective::Downstairs => {
            let edge = terrain.final_edge()?;
            com.iter().position(|c| c[0] > edge)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub init_amplitude: f64,
    pub init_bias: f64,
    /// Sinusoid period in simulation steps.
    pub period_steps: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.02,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            init_amplitude: 0.15,
            init_bias: 0.3,
            period_steps: 500.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("optimization budget must be at least one iteration")]
    BudgetZero,
    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },
    #[error("simulation failed at iteration {iteration}: {source}")]
    Simulation { iteration: usize, source: SimError },
    #[error(transparent)]
    Task(#[from] TaskError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Optimized {
    pub plan: ActuationPlan,
    pub trajectory: Trajectory,
    pub initial_loss: f64,
    pub best_loss: f64,
    pub best_iteration: usize,
    /// Loss and flattened parameters at every evaluated iterate.
    pub history: Vec<(f64, Vec<f64>)>,
}

pub fn initial_plan(n_actuators: usize, seed: u64, sim: &SimConfig, opt: &OptimizerConfig) -> ActuationPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase = (0..n_actuators).map(|_| rng.gen_range(0.0..TAU)).collect();
    ActuationPlan::sinusoid(
        vec![opt.init_amplitude; n_actuators],
        phase,
        vec![opt.init_bias; n_actuators],
        TAU / (opt.period_steps * sim.dt),
    )
}

/// Runs `plan` for `steps` steps and fills in loss and completion step.
pub fn evaluate_plan(
    mesh: &RobotMesh,
    task: &TaskSpec,
    terrain: &Terrain,
    plan: &ActuationPlan,
    sim: &SimConfig,
    steps: usize,
) -> Result<Trajectory, SimError> {
    let mut traj = sim::rollout_for(mesh, terrain, plan, sim, steps, 0)?;
    traj.loss = loss_for(task).value(&traj.com_track);
    traj.completion_step = completion_step(task, terrain, &traj.com_track);
    Ok(traj)
}

/// Adaptive-moment descent on the sinusoid parameters. Every iteration
/// evaluates the loss and gradient at the current iterate; the best
/// evaluated iterate is returned.
pub fn optimize(
    mesh: &RobotMesh,
    task: &TaskSpec,
    terrain: &Terrain,
    seed: u64,
    budget: usize,
    sim: &SimConfig,
    opt: &OptimizerConfig,
) -> Result<Optimized, ControlError> {
    if budget == 0 {
        return Err(ControlError::BudgetZero);
    }
    task.check()?;
    let mut plan = initial_plan(mesh.n_actuators, seed, sim, opt);
    let loss = loss_for(task);
    let mut params = plan.flat_params();
    let mut m = vec![0.0; params.len()];
    let mut v = vec![0.0; params.len()];
    let mut history = Vec::with_capacity(budget);
    let mut best = (f64::INFINITY, 0usize);

    for iteration in 0..budget {
        plan.set_flat_params(&params);
        let (value, grad) = sim::gradient(mesh, terrain, &plan, &loss, sim).map_err(|e| match e {
            SimError::NonFiniteGradient { .. } => ControlError::NonFiniteGradient { iteration },
            source => ControlError::Simulation { iteration, source },
        })?;
        history.push((value, params.clone()));
        if value < best.0 {
            best = (value, iteration);
        }
        if iteration + 1 == budget {
            break;
        }
        let t = (iteration + 1) as i32;
        let c1 = 1.0 - opt.beta1.powi(t);
        let c2 = 1.0 - opt.beta2.powi(t);
        for k in 0..params.len() {
            m[k] = opt.beta1 * m[k] + (1.0 - opt.beta1) * grad[k];
            v[k] = opt.beta2 * v[k] + (1.0 - opt.beta2) * grad[k] * grad[k];
            params[k] -= opt.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + opt.epsilon);
        }
    }

    plan.set_flat_params(&history[best.1].1);
    let trajectory = evaluate_plan(mesh, task, terrain, &plan, sim, sim.n_steps).map_err(|source| {
        ControlError::Simulation {
            iteration: best.1,
            source,
        }
    })?;
    Ok(Optimized {
        plan,
        trajectory,
        initial_loss: history[0].0,
        best_loss: best.0,
        best_iteration: best.1,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TrackLoss;

    fn track(xs: &[f64]) -> Vec<Vec2> {
        xs.iter().map(|&x| [x, 0.0]).collect()
    }

    fn flat(objective: Objective, d: Option<f64>) -> TaskSpec {
        TaskSpec {
            distance_req: d,
            ..TaskSpec::new(objective, Environment::FlatPlane)
        }
    }

    #[test]
    fn sinusoid_is_clamped() {
        let plan = ActuationPlan::sinusoid(vec![2.0, 0.1], vec![0.0, 1.0], vec![0.5, -3.0], 3.0);
        let mut u = [0.0; 2];
        for k in 0..200 {
            plan.fill(k as f64 * 0.013, &mut u);
            assert!(u.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        plan.fill(0.0, &mut u);
        assert_eq!(u, [0.5, 0.0]);
    }

    #[test]
    fn piecewise_cycles() {
        let plan = ActuationPlan::PiecewiseConstant {
            schedule: vec![vec![
                Segment { duration: 1.0, level: 1.0 },
                Segment { duration: 0.5, level: 0.2 },
            ]],
        };
        plan.check().unwrap();
        let at = |t: f64| {
            let mut u = [0.0];
            plan.fill(t, &mut u);
            u[0]
        };
        assert_eq!(at(0.0), 1.0);
        assert_eq!(at(1.2), 0.2);
        assert_eq!(at(1.6), 1.0);
        assert_eq!(at(2.9), 0.2);
        let bad = ActuationPlan::PiecewiseConstant {
            schedule: vec![vec![Segment { duration: 0.0, level: 1.0 }]],
        };
        assert_eq!(bad.check(), Err(PlanError::Duration { actuator: 0 }));
    }

    #[test]
    fn controller_json_shape() {
        let plan = ActuationPlan::sinusoid(vec![0.1], vec![0.2], vec![0.3], 4.0);
        let json = serde_json::to_value(&plan).unwrap();
        assert_eq!(json["kind"], "sinusoid");
        assert_eq!(json["parameters"]["bias"][0], 0.3);
        assert_eq!(json["omega"], 4.0);
        let back: ActuationPlan = serde_json::from_value(json).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn stationary_uni_loss_is_zero() {
        assert_eq!(TaskLoss(Objective::Uni).value(&track(&[1.0, 1.0, 1.0])), 0.0);
    }

    #[test]
    fn back_forth_apex_loss() {
        let com = track(&[0.0, 1.5, 3.0, 1.5, 0.0]);
        assert_eq!(TaskLoss(Objective::BackForth).value(&com), -3.0);
    }

    #[test]
    fn loss_partials_match_differences() {
        let com = track(&[0.3, 1.0, 2.2, 1.7, 1.1, 0.9, 0.4]);
        for objective in Objective::ALL {
            let loss = TaskLoss(objective);
            let (_, partials) = loss.evaluate(&com);
            let mut dense = vec![0.0; com.len()];
            for (n, g) in partials {
                dense[n] += g[0];
            }
            for n in 0..com.len() {
                let h = 1e-6;
                let mut a = com.clone();
                let mut b = com.clone();
                a[n][0] += h;
                b[n][0] -= h;
                let fd = (loss.value(&a) - loss.value(&b)) / (2.0 * h);
                assert!((fd - dense[n]).abs() < 1e-6, "{objective} step {n}");
            }
        }
    }

    #[test]
    fn completion_examples() {
        let uni = flat(Objective::Uni, Some(4.0));
        let com = track(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(completion_step(&uni, &Terrain::Flat, &com), Some(4));
        assert_eq!(completion_step(&uni, &Terrain::Flat, &track(&[0.0, 1.0, 2.0])), None);
        let bf = flat(Objective::BackForth, Some(2.0));
        let com = track(&[0.0, 0.4, 1.0, 2.1, 1.2, 0.6, 0.3, 0.0]);
        assert_eq!(completion_step(&bf, &Terrain::Flat, &com), Some(6));
        let ds = TaskSpec::new(Objective::Downstairs, Environment::Stairs(StairParams::default()));
        let terrain = ds.environment.terrain(2.0);
        let edge = terrain.final_edge().unwrap();
        let com = track(&[1.0, edge - 0.1, edge, edge + 0.1]);
        assert_eq!(completion_step(&ds, &terrain, &com), Some(3));
    }

    #[test]
    fn task_consistency() {
        assert!(flat(Objective::Uni, None).check().is_ok());
        assert!(matches!(
            TaskSpec::new(Objective::Downstairs, Environment::FlatPlane).check(),
            Err(TaskError::Mismatch { .. })
        ));
        assert!(matches!(
            TaskSpec::new(Objective::Uni, Environment::Stairs(StairParams::default())).check(),
            Err(TaskError::Mismatch { .. })
        ));
        assert_eq!(flat(Objective::Uni, Some(-1.0)).check(), Err(TaskError::Distance));
        assert_eq!(flat(Objective::Uni, None).distance(), DEFAULT_DISTANCE);
    }

    #[test]
    fn environment_strings() {
        for s in ["flat_plane", "stairs:1.5,0.25,3,0.5"] {
            assert_eq!(s.parse::<Environment>().unwrap().to_string(), s);
        }
        assert_eq!(
            "stairs".parse::<Environment>().unwrap(),
            Environment::Stairs(StairParams::default())
        );
        assert!("lava".parse::<Environment>().is_err());
        assert_eq!("back-and-forth".parse::<Objective>().unwrap(), Objective::BackForth);
    }

    #[test]
    fn block_bounds() {
        let t = TaskSpec {
            max_blocks: Some(9),
            ..flat(Objective::Uni, None)
        };
        assert!(t.blocks_within_bounds(8));
        assert!(!t.blocks_within_bounds(10));
    }
}
