//! SVG frames of simulated robots and compact trajectory summaries.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::mesh::{RobotMesh, Vec2};
use crate::sim::{Signals, Terrain, Trajectory};

const SCALE: f64 = 60.0;
const MARGIN: f64 = 0.5;

/// World-space rectangle shown by every frame of an animation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub min: Vec2,
    pub max: Vec2,
}

impl Viewport {
    /// Bounding box of all kept states plus a margin; always includes the
    /// terrain at `y = 0`.
    pub fn fit(traj: &Trajectory, terrain: &Terrain) -> Self {
        let mut min = [f64::INFINITY, 0.0f64];
        let mut max = [f64::NEG_INFINITY, f64::NEG_INFINITY];
        for p in traj.states.iter().flat_map(|s| &s.x) {
            min = [min[0].min(p[0]), min[1].min(p[1])];
            max = [max[0].max(p[0]), max[1].max(p[1])];
        }
        if let Terrain::Stairs { step_height, n_steps, .. } = terrain {
            max[1] = max[1].max(step_height * *n_steps as f64);
        }
        if !min[0].is_finite() {
            min = [0.0, 0.0];
            max = [1.0, 1.0];
        }
        Viewport {
            min: [min[0] - MARGIN, min[1] - MARGIN],
            max: [max[0] + MARGIN, max[1] + MARGIN],
        }
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        ((p[0] - self.min[0]) * SCALE, (self.max[1] - p[1]) * SCALE)
    }
}

/// Blue at rest through red at full contraction.
fn signal_color(u: f64) -> String {
    let u = u.clamp(0.0, 1.0);
    format!("rgb({},{},{})", (40.0 + 215.0 * u) as u8, 60, (255.0 - 215.0 * u) as u8)
}

fn terrain_points(terrain: &Terrain, view: &Viewport) -> Vec<Vec2> {
    let (x0, x1) = (view.min[0], view.max[0]);
    match *terrain {
        Terrain::Flat => vec![[x0, 0.0], [x1, 0.0]],
        Terrain::Stairs { step_width, n_steps, x_start, .. } => {
            let mut pts = vec![[x0, terrain.height(x0)]];
            for k in 0..n_steps {
                let x = x_start + step_width * k as f64;
                if x > x0 && x < x1 {
                    pts.push([x, terrain.height(x - 1e-9)]);
                    pts.push([x, terrain.height(x)]);
                }
            }
            pts.push([x1, terrain.height(x1)]);
            pts
        }
    }
}

/// One frame: terrain, passive springs in grey, actuated springs colored by
/// their current signal `u`.
pub fn render_frame(mesh: &RobotMesh, positions: &[Vec2], u: &[f64], terrain: &Terrain, view: &Viewport) -> String {
    let w = (view.max[0] - view.min[0]) * SCALE;
    let h = (view.max[1] - view.min[1]) * SCALE;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(svg, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let ground: Vec<String> = terrain_points(terrain, view)
        .into_iter()
        .map(|p| {
            let (x, y) = view.map(p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#444444" stroke-width="2"/>"##,
        ground.join(" ")
    );
    for s in &mesh.springs {
        let (x1, y1) = view.map(positions[s.i]);
        let (x2, y2) = view.map(positions[s.j]);
        let (color, width) = match s.actuator {
            Some(a) => (signal_color(u[a]), 3.0),
            None => ("#b0b0b0".to_owned(), 1.5),
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{color}" stroke-width="{width}"/>"#
        );
    }
    for p in positions {
        let (x, y) = view.map(*p);
        let _ = writeln!(svg, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="#222222"/>"##);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Step index of every kept state in a trajectory simulated for `steps`
/// steps.
pub fn frame_steps(traj: &Trajectory, steps: usize) -> Vec<usize> {
    (0..traj.states.len()).map(|k| (k * traj.stride).min(steps)).collect()
}

/// All frames of a trajectory, paired with their file names.
pub fn render_frames(
    mesh: &RobotMesh,
    traj: &Trajectory,
    signals: &dyn Signals,
    terrain: &Terrain,
    dt: f64,
    steps: usize,
) -> Vec<(String, String)> {
    let view = Viewport::fit(traj, terrain);
    let mut u = vec![0.0; mesh.n_actuators];
    traj.states
        .iter()
        .zip(frame_steps(traj, steps))
        .enumerate()
        .map(|(k, (state, n))| {
            signals.fill(n as f64 * dt, &mut u);
            (format!("frame_{k:06}.svg"), render_frame(mesh, &state.x, &u, terrain, &view))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub loss: f64,
    pub completion_step: Option<usize>,
    pub displacement: Vec2,
    /// Every `decimation`-th center of mass, plus the last one.
    pub decimation: usize,
    pub com_track_decimated: Vec<Vec2>,
}

pub fn summarize(traj: &Trajectory, decimation: usize) -> TrajectorySummary {
    let decimation = decimation.max(1);
    let n = traj.com_track.len();
    let mut track: Vec<Vec2> = traj.com_track.iter().step_by(decimation).copied().collect();
    if n > 0 && (n - 1) % decimation != 0 {
        track.push(traj.com_track[n - 1]);
    }
    TrajectorySummary {
        loss: traj.loss,
        completion_step: traj.completion_step,
        displacement: traj.displacement(),
        decimation,
        com_track_decimated: track,
    }
}
