//! Differentiable 2D mass-spring dynamics.
//!
//! Forces: contractile springs with axial damping, gravity, and penalty
//! contact against a height-field terrain with tanh-smoothed Coulomb
//! friction. Integration is semi-implicit Euler. Gradients of losses on the
//! center-of-mass track are computed by a hand-written adjoint pass over
//! checkpointed segments of the forward rollout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{RobotMesh, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terrain {
    Flat,
    Stairs {
        step_width: f64,
        step_height: f64,
        n_steps: u32,
        x_start: f64,
    },
}

impl Terrain {
    pub fn height(&self, x: f64) -> f64 {
        match *self {
            Terrain::Flat => 0.0,
            Terrain::Stairs {
                step_width,
                step_height,
                n_steps,
                x_start,
            } => {
                if x < x_start {
                    return step_height * n_steps as f64;
                }
                let dropped = ((x - x_start) / step_width).floor() as i64 + 1;
                let left = (n_steps as i64 - dropped).max(0);
                step_height * left as f64
            }
        }
    }

    /// Position of the last drop, past which the terrain is at ground level.
    pub fn final_edge(&self) -> Option<f64> {
        match *self {
            Terrain::Flat => None,
            Terrain::Stairs {
                step_width,
                n_steps,
                x_start,
                ..
            } => Some(x_start + step_width * (n_steps.max(1) - 1) as f64),
        }
    }
}

impl fmt::Display for Terrain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Terrain::Flat => f.write_str("flat"),
            Terrain::Stairs {
                step_width,
                step_height,
                n_steps,
                x_start,
            } => write!(f, "stairs:{step_width},{step_height},{n_steps},{x_start}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid terrain {0:?}; expected `flat` or `stairs:WIDTH,HEIGHT,N,X_START`")]
pub struct TerrainParseError(String);

impl FromStr for Terrain {
    type Err = TerrainParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || TerrainParseError(s.to_owned());
        let s = s.trim();
        if s.eq_ignore_ascii_case("flat") {
            return Ok(Terrain::Flat);
        }
        let rest = s.strip_prefix("stairs:").ok_or_else(err)?;
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        let [w, h, n, x0] = parts.as_slice() else {
            return Err(err());
        };
        let terrain = Terrain::Stairs {
            step_width: w.parse().map_err(|_| err())?,
            step_height: h.parse().map_err(|_| err())?,
            n_steps: n.parse().map_err(|_| err())?,
            x_start: x0.parse().map_err(|_| err())?,
        };
        match terrain {
            Terrain::Stairs {
                step_width,
                step_height,
                n_steps,
                ..
            } if step_width > 0.0 && step_height >= 0.0 && n_steps >= 1 => Ok(terrain),
            _ => Err(err()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub n_steps: usize,
    /// Downward gravitational acceleration.
    pub gravity: f64,
    pub contact_stiffness: f64,
    pub contact_damping: f64,
    pub friction: f64,
    /// Velocity scale of the tanh friction smoothing.
    pub friction_eps: f64,
    /// Fractional rest-length contraction at full actuation.
    pub max_contraction: f64,
    /// Gap between the lowest particle and the terrain at the start.
    pub clearance: f64,
    pub checkpoint_interval: usize,
    /// Disables terrain contact entirely.
    pub contact: bool,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1.0e-3,
            n_steps: 2048,
            gravity: 4.8,
            contact_stiffness: 3.0e3,
            contact_damping: 150.0,
            friction: 1.0,
            friction_eps: 0.1,
            max_contraction: 0.3,
            clearance: 0.01,
            checkpoint_interval: 32,
            contact: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("non-finite state at step {step} (particle {particle})")]
    NonFiniteState { step: usize, particle: usize },
    #[error("non-finite gradient entry {index}")]
    NonFiniteGradient { index: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("actuation signal has {got} entries, mesh has {expected} actuators")]
    SignalLength { expected: usize, got: usize },
}

impl SimConfig {
    pub fn check(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::InvalidConfig("dt must be positive"));
        }
        if self.contact_stiffness < 0.0 || self.contact_damping < 0.0 || self.friction < 0.0 {
            return Err(SimError::InvalidConfig("contact coefficients must be non-negative"));
        }
        if self.friction_eps <= 0.0 {
            return Err(SimError::InvalidConfig("friction_eps must be positive"));
        }
        if self.checkpoint_interval == 0 {
            return Err(SimError::InvalidConfig("checkpoint_interval must be positive"));
        }
        Ok(())
    }
}

/// Particle positions and velocities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: Vec<Vec2>,
    pub v: Vec<Vec2>,
}

impl State {
    pub fn at_rest(positions: Vec<Vec2>) -> Self {
        let v = vec![[0.0; 2]; positions.len()];
        State { x: positions, v }
    }
}

/// Source of actuator signals in `[0, 1]`.
pub trait Signals {
    fn n_actuators(&self) -> usize;
    fn fill(&self, t: f64, out: &mut [f64]);
}

/// Signals with a vector-Jacobian product with respect to their parameters.
pub trait DifferentiableSignals: Signals {
    fn n_params(&self) -> usize;
    /// Adds `(du/dθ)^T u_bar` at time `t` into `grad`.
    fn accumulate_grad(&self, t: f64, u_bar: &[f64], grad: &mut [f64]);
}

/// Zero actuation on every channel.
#[derive(Debug, Clone, Copy)]
pub struct Idle(pub usize);

impl Signals for Idle {
    fn n_actuators(&self) -> usize {
        self.0
    }
    fn fill(&self, _t: f64, out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// Scalar loss on the center-of-mass track.
pub trait TrackLoss {
    /// Loss value and its non-zero partials `(step, dL/dcom)`.
    fn evaluate(&self, com: &[Vec2]) -> (f64, Vec<(usize, Vec2)>);
}

impl<F> TrackLoss for F
where
    F: Fn(&[Vec2]) -> (f64, Vec<(usize, Vec2)>),
{
    fn evaluate(&self, com: &[Vec2]) -> (f64, Vec<(usize, Vec2)>) {
        self(com)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    /// Center of mass at every step, starting with the initial state.
    pub com_track: Vec<Vec2>,
    /// States kept every `stride` steps (empty when `stride == 0`).
    pub states: Vec<State>,
    pub stride: usize,
    pub completion_step: Option<usize>,
    pub loss: f64,
    /// Lowest `y - height(x)` over all particles and steps.
    pub min_clearance: f64,
}

impl Trajectory {
    pub fn displacement(&self) -> Vec2 {
        let first = self.com_track[0];
        let last = *self.com_track.last().expect("non-empty track");
        [last[0] - first[0], last[1] - first[1]]
    }
}

fn spring_geometry(a: Vec2, b: Vec2) -> (Vec2, f64) {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
    (d, len)
}

/// Rest pose with its leftmost point at `x = 0` and lowest point
/// `clearance` above the terrain.
pub fn initial_state(mesh: &RobotMesh, terrain: &Terrain, config: &SimConfig) -> State {
    let rest = mesh.rest_positions();
    let min_x = rest.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let min_y = rest.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let max_x = rest.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    let ground = if rest.is_empty() {
        0.0
    } else {
        sample_max_height(terrain, 0.0, max_x - min_x)
    };
    let dy = ground + config.clearance - min_y;
    State::at_rest(rest.iter().map(|p| [p[0] - min_x, p[1] + dy]).collect())
}

fn sample_max_height(terrain: &Terrain, a: f64, b: f64) -> f64 {
    match terrain {
        Terrain::Flat => 0.0,
        // non-increasing in x
        Terrain::Stairs { .. } => terrain.height(a).max(terrain.height(b)),
    }
}

/// Shared force evaluation with scratch buffers.
struct Dynamics<'a> {
    mesh: &'a RobotMesh,
    terrain: &'a Terrain,
    config: &'a SimConfig,
    inv_mass: Vec<f64>,
}

impl<'a> Dynamics<'a> {
    fn new(mesh: &'a RobotMesh, terrain: &'a Terrain, config: &'a SimConfig) -> Self {
        let inv_mass = mesh.particles.iter().map(|p| 1.0 / p.mass).collect();
        Dynamics {
            mesh,
            terrain,
            config,
            inv_mass,
        }
    }

    fn rest_length(&self, rest: f64, actuator: Option<usize>, u: &[f64]) -> f64 {
        match actuator {
            Some(a) => rest * (1.0 - self.config.max_contraction * u[a]),
            None => rest,
        }
    }

    fn forces(&self, s: &State, u: &[f64], f: &mut [Vec2]) {
        let cfg = self.config;
        for (fi, p) in f.iter_mut().zip(&self.mesh.particles) {
            *fi = [0.0, -p.mass * cfg.gravity];
        }
        for sp in &self.mesh.springs {
            let (d, len) = spring_geometry(s.x[sp.i], s.x[sp.j]);
            let n = [d[0] / len, d[1] / len];
            let dv = [s.v[sp.j][0] - s.v[sp.i][0], s.v[sp.j][1] - s.v[sp.i][1]];
            let l = self.rest_length(sp.rest_length, sp.actuator, u);
            let tension = sp.stiffness * (len - l) + sp.damping * (dv[0] * n[0] + dv[1] * n[1]);
            f[sp.i][0] += tension * n[0];
            f[sp.i][1] += tension * n[1];
            f[sp.j][0] -= tension * n[0];
            f[sp.j][1] -= tension * n[1];
        }
        if cfg.contact {
            for (k, fi) in f.iter_mut().enumerate() {
                let (x, v) = (s.x[k], s.v[k]);
                let pen = self.terrain.height(x[0]) - x[1];
                if pen > 0.0 {
                    let normal = cfg.contact_stiffness * pen - cfg.contact_damping * v[1];
                    if normal > 0.0 {
                        fi[1] += normal;
                        fi[0] -= cfg.friction * normal * (v[0] / cfg.friction_eps).tanh();
                    }
                }
            }
        }
    }

    /// Adds the vector-Jacobian product of `forces` for cotangent `f_bar`.
    fn forces_vjp(
        &self,
        s: &State,
        u: &[f64],
        f_bar: &[Vec2],
        x_bar: &mut [Vec2],
        v_bar: &mut [Vec2],
        u_bar: &mut [f64],
    ) {
        let cfg = self.config;
        for sp in &self.mesh.springs {
            let (d, len) = spring_geometry(s.x[sp.i], s.x[sp.j]);
            let n = [d[0] / len, d[1] / len];
            let dv = [s.v[sp.j][0] - s.v[sp.i][0], s.v[sp.j][1] - s.v[sp.i][1]];
            let l = self.rest_length(sp.rest_length, sp.actuator, u);
            let rel = dv[0] * n[0] + dv[1] * n[1];
            let tension = sp.stiffness * (len - l) + sp.damping * rel;

            // f_i = T n, f_j = -T n
            let g = [f_bar[sp.i][0] - f_bar[sp.j][0], f_bar[sp.i][1] - f_bar[sp.j][1]];
            let t_bar = g[0] * n[0] + g[1] * n[1];
            let mut n_bar = [tension * g[0] + t_bar * sp.damping * dv[0], tension * g[1] + t_bar * sp.damping * dv[1]];
            let dv_bar = [t_bar * sp.damping * n[0], t_bar * sp.damping * n[1]];
            v_bar[sp.j][0] += dv_bar[0];
            v_bar[sp.j][1] += dv_bar[1];
            v_bar[sp.i][0] -= dv_bar[0];
            v_bar[sp.i][1] -= dv_bar[1];

            let len_bar = sp.stiffness * t_bar;
            if let Some(a) = sp.actuator {
                // l = l0 (1 - c u)
                u_bar[a] += sp.stiffness * t_bar * sp.rest_length * cfg.max_contraction;
            }
            // n = d / |d|
            let nn = n_bar[0] * n[0] + n_bar[1] * n[1];
            n_bar[0] = (n_bar[0] - nn * n[0]) / len;
            n_bar[1] = (n_bar[1] - nn * n[1]) / len;
            let d_bar = [n_bar[0] + len_bar * n[0], n_bar[1] + len_bar * n[1]];
            x_bar[sp.j][0] += d_bar[0];
            x_bar[sp.j][1] += d_bar[1];
            x_bar[sp.i][0] -= d_bar[0];
            x_bar[sp.i][1] -= d_bar[1];
        }
        if cfg.contact {
            for k in 0..s.x.len() {
                let (x, v) = (s.x[k], s.v[k]);
                let pen = self.terrain.height(x[0]) - x[1];
                if pen <= 0.0 {
                    continue;
                }
                let normal = cfg.contact_stiffness * pen - cfg.contact_damping * v[1];
                if normal <= 0.0 {
                    continue;
                }
                let th = (v[0] / cfg.friction_eps).tanh();
                let normal_bar = f_bar[k][1] - cfg.friction * th * f_bar[k][0];
                v_bar[k][0] -= f_bar[k][0] * cfg.friction * normal * (1.0 - th * th) / cfg.friction_eps;
                x_bar[k][1] -= cfg.contact_stiffness * normal_bar;
                v_bar[k][1] -= cfg.contact_damping * normal_bar;
            }
        }
    }

    /// Semi-implicit Euler step in place; `f` is scratch.
    fn advance(&self, s: &mut State, u: &[f64], f: &mut [Vec2], step: usize) -> Result<(), SimError> {
        self.forces(s, u, f);
        let dt = self.config.dt;
        for k in 0..s.x.len() {
            let w = self.inv_mass[k];
            s.v[k][0] += dt * f[k][0] * w;
            s.v[k][1] += dt * f[k][1] * w;
            s.x[k][0] += dt * s.v[k][0];
            s.x[k][1] += dt * s.v[k][1];
            if !(s.x[k][0].is_finite() && s.x[k][1].is_finite() && s.v[k][0].is_finite() && s.v[k][1].is_finite()) {
                return Err(SimError::NonFiniteState { step, particle: k });
            }
        }
        Ok(())
    }

    /// Pulls `(x_bar, v_bar)` of the state after a step back to the state
    /// before it, accumulating actuation cotangents into `u_bar`.
    fn advance_vjp(
        &self,
        before: &State,
        u: &[f64],
        x_bar: &mut [Vec2],
        v_bar: &mut [Vec2],
        u_bar: &mut [f64],
        f_bar: &mut [Vec2],
    ) {
        let dt = self.config.dt;
        for k in 0..x_bar.len() {
            // x' = x + dt v', v' = v + dt f / m
            v_bar[k][0] += dt * x_bar[k][0];
            v_bar[k][1] += dt * x_bar[k][1];
            f_bar[k][0] = dt * v_bar[k][0] * self.inv_mass[k];
            f_bar[k][1] = dt * v_bar[k][1] * self.inv_mass[k];
        }
        self.forces_vjp(before, u, f_bar, x_bar, v_bar, u_bar);
    }
}

fn check_signals(mesh: &RobotMesh, signals: &dyn Signals) -> Result<(), SimError> {
    if signals.n_actuators() != mesh.n_actuators {
        return Err(SimError::SignalLength {
            expected: mesh.n_actuators,
            got: signals.n_actuators(),
        });
    }
    Ok(())
}

/// Advances `state` by one time step under actuation `u`.
pub fn step(
    state: &State,
    mesh: &RobotMesh,
    terrain: &Terrain,
    u: &[f64],
    config: &SimConfig,
) -> Result<State, SimError> {
    if u.len() != mesh.n_actuators {
        return Err(SimError::SignalLength {
            expected: mesh.n_actuators,
            got: u.len(),
        });
    }
    let dynamics = Dynamics::new(mesh, terrain, config);
    let mut next = state.clone();
    let mut f = vec![[0.0; 2]; mesh.particles.len()];
    dynamics.advance(&mut next, u, &mut f, 0)?;
    Ok(next)
}

/// Simulates `steps` steps from [`initial_state`], keeping every
/// `stride`-th state (and the last one) when `stride > 0`.
pub fn rollout_for(
    mesh: &RobotMesh,
    terrain: &Terrain,
    signals: &dyn Signals,
    config: &SimConfig,
    steps: usize,
    stride: usize,
) -> Result<Trajectory, SimError> {
    config.check()?;
    check_signals(mesh, signals)?;
    let dynamics = Dynamics::new(mesh, terrain, config);
    let mut state = initial_state(mesh, terrain, config);
    let mut u = vec![0.0; mesh.n_actuators];
    let mut f = vec![[0.0; 2]; mesh.particles.len()];
    let mut com_track = Vec::with_capacity(steps + 1);
    let mut states = Vec::new();
    let clearance = |s: &State| {
        s.x.iter()
            .map(|p| p[1] - terrain.height(p[0]))
            .fold(f64::INFINITY, f64::min)
    };
    let mut min_clearance = clearance(&state);
    com_track.push(mesh.center_of_mass(&state.x));
    if stride > 0 {
        states.push(state.clone());
    }
    for n in 0..steps {
        signals.fill(n as f64 * config.dt, &mut u);
        dynamics.advance(&mut state, &u, &mut f, n)?;
        com_track.push(mesh.center_of_mass(&state.x));
        min_clearance = min_clearance.min(clearance(&state));
        if stride > 0 && ((n + 1) % stride == 0 || n + 1 == steps) {
            states.push(state.clone());
        }
    }
    Ok(Trajectory {
        com_track,
        states,
        stride,
        completion_step: None,
        loss: 0.0,
        min_clearance,
    })
}

/// Simulates `config.n_steps` steps keeping only the center-of-mass track.
pub fn rollout(
    mesh: &RobotMesh,
    terrain: &Terrain,
    signals: &dyn Signals,
    config: &SimConfig,
) -> Result<Trajectory, SimError> {
    rollout_for(mesh, terrain, signals, config, config.n_steps, 0)
}

/// Loss over a `config.n_steps` rollout and its gradient with respect to
/// the signal parameters, by reverse-mode differentiation through every
/// time step. States are checkpointed every `config.checkpoint_interval`
/// steps and each segment is recomputed during the backward sweep.
pub fn gradient(
    mesh: &RobotMesh,
    terrain: &Terrain,
    signals: &dyn DifferentiableSignals,
    loss: &dyn TrackLoss,
    config: &SimConfig,
) -> Result<(f64, Vec<f64>), SimError> {
    reverse(mesh, terrain, signals, config, &mut |com, _| {
        let (value, partials) = loss.evaluate(com);
        (value, partials, Vec::new())
    })
}

/// Like [`gradient`] for a loss on the final particle positions; `loss`
/// returns the value and `dL/dx` per particle.
pub fn gradient_final(
    mesh: &RobotMesh,
    terrain: &Terrain,
    signals: &dyn DifferentiableSignals,
    loss: &dyn Fn(&[Vec2]) -> (f64, Vec<Vec2>),
    config: &SimConfig,
) -> Result<(f64, Vec<f64>), SimError> {
    reverse(mesh, terrain, signals, config, &mut |_, last| {
        let (value, x_bar) = loss(&last.x);
        (value, Vec::new(), x_bar)
    })
}

type SeedFn<'a> = dyn FnMut(&[Vec2], &State) -> (f64, Vec<(usize, Vec2)>, Vec<Vec2>) + 'a;

fn reverse(
    mesh: &RobotMesh,
    terrain: &Terrain,
    signals: &dyn DifferentiableSignals,
    config: &SimConfig,
    loss: &mut SeedFn<'_>,
) -> Result<(f64, Vec<f64>), SimError> {
    config.check()?;
    check_signals(mesh, signals)?;
    let steps = config.n_steps;
    let interval = config.checkpoint_interval;
    let np = mesh.particles.len();
    let dynamics = Dynamics::new(mesh, terrain, config);
    let total_mass = mesh.total_mass();
    let signal_at = |n: usize, u: &mut [f64]| signals.fill(n as f64 * config.dt, u);

    let mut state = initial_state(mesh, terrain, config);
    let mut u = vec![0.0; mesh.n_actuators];
    let mut f = vec![[0.0; 2]; np];
    let mut checkpoints = Vec::with_capacity(steps / interval + 1);
    let mut com = Vec::with_capacity(steps + 1);
    com.push(mesh.center_of_mass(&state.x));
    for n in 0..steps {
        if n % interval == 0 {
            checkpoints.push(state.clone());
        }
        signal_at(n, &mut u);
        dynamics.advance(&mut state, &u, &mut f, n)?;
        com.push(mesh.center_of_mass(&state.x));
    }

    let (value, partials, final_x_bar) = loss(&com, &state);
    let mut seeds = vec![[0.0; 2]; steps + 1];
    for (n, g) in partials {
        seeds[n][0] += g[0];
        seeds[n][1] += g[1];
    }
    let seed_state = |n: usize, x_bar: &mut [Vec2]| {
        let g = seeds[n];
        if g != [0.0, 0.0] {
            for (xb, p) in x_bar.iter_mut().zip(&mesh.particles) {
                let w = p.mass / total_mass;
                xb[0] += g[0] * w;
                xb[1] += g[1] * w;
            }
        }
    };

    let mut grad = vec![0.0; signals.n_params()];
    let mut x_bar = vec![[0.0; 2]; np];
    let mut v_bar = vec![[0.0; 2]; np];
    let mut f_bar = vec![[0.0; 2]; np];
    let mut u_bar = vec![0.0; mesh.n_actuators];
    seed_state(steps, &mut x_bar);
    for (xb, g) in x_bar.iter_mut().zip(&final_x_bar) {
        xb[0] += g[0];
        xb[1] += g[1];
    }

    let mut segment: Vec<State> = Vec::with_capacity(interval);
    for (c, checkpoint) in checkpoints.iter().enumerate().rev() {
        let start = c * interval;
        let end = (start + interval).min(steps);
        segment.clear();
        let mut s = checkpoint.clone();
        for n in start..end {
            segment.push(s.clone());
            if n + 1 < end {
                signal_at(n, &mut u);
                dynamics.advance(&mut s, &u, &mut f, n)?;
            }
        }
        for n in (start..end).rev() {
            signal_at(n, &mut u);
            u_bar.fill(0.0);
            dynamics.advance_vjp(&segment[n - start], &u, &mut x_bar, &mut v_bar, &mut u_bar, &mut f_bar);
            signals.accumulate_grad(n as f64 * config.dt, &u_bar, &mut grad);
            seed_state(n, &mut x_bar);
        }
    }

    if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
        return Err(SimError::NonFiniteGradient { index });
    }
    Ok((value, grad))
}

/// Kinetic + elastic + gravitational energy, ignoring actuation.
pub fn energy(mesh: &RobotMesh, state: &State, config: &SimConfig) -> f64 {
    let kinetic: f64 = mesh
        .particles
        .iter()
        .zip(&state.v)
        .map(|(p, v)| 0.5 * p.mass * (v[0] * v[0] + v[1] * v[1]))
        .sum();
    let potential: f64 = mesh
        .particles
        .iter()
        .zip(&state.x)
        .map(|(p, x)| p.mass * config.gravity * x[1])
        .sum();
    let elastic: f64 = mesh
        .springs
        .iter()
        .map(|sp| {
            let (_, len) = spring_geometry(state.x[sp.i], state.x[sp.j]);
            0.5 * sp.stiffness * (len - sp.rest_length).powi(2)
        })
        .sum();
    kinetic + potential + elastic
}
