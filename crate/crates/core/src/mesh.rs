//! Point-mass/spring bodies built from grid designs.
//!
//! Every module is a unit square: four corner masses, four contractile edge
//! springs and two passive diagonals. Corners and edges shared by adjacent
//! modules are merged.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::{validate, GridDesign, Verdict};

pub type Vec2 = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub cell_mass: f64,
    pub edge_stiffness: f64,
    pub diagonal_stiffness: f64,
    /// Axial damping coefficient applied to every spring.
    pub damping: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            cell_mass: 1.0,
            edge_stiffness: 3.0e4,
            diagonal_stiffness: 3.0e4,
            damping: 60.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Vec2,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spring {
    pub i: usize,
    pub j: usize,
    pub rest_length: f64,
    pub stiffness: f64,
    pub damping: f64,
    pub actuator: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotMesh {
    pub particles: Vec<Particle>,
    pub springs: Vec<Spring>,
    pub n_actuators: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("cannot mesh an illegal design: {0}")]
    IllegalDesign(Verdict),
}

const CORNERS: [(i32, i32); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];
// bottom, right, top, left as corner index pairs
const EDGES: [(usize, usize); 4] = [(0, 1), (1, 2), (3, 2), (0, 3)];
const DIAGONALS: [(usize, usize); 2] = [(0, 2), (1, 3)];

pub fn build_mesh(design: &GridDesign, params: &MaterialParams) -> Result<RobotMesh, MeshError> {
    let verdict = validate(design, None);
    if !verdict.legal {
        return Err(MeshError::IllegalDesign(verdict));
    }
    let mut corner_index: HashMap<(i32, i32), usize> = HashMap::new();
    let mut edge_seen: HashMap<(usize, usize), ()> = HashMap::new();
    let mut particles: Vec<Particle> = Vec::new();
    let mut springs = Vec::new();
    let mut n_actuators = 0;
    let corner_mass = params.cell_mass / 4.0;

    for (c, r) in design.cells() {
        let idx: Vec<usize> = CORNERS
            .iter()
            .map(|&(dc, dr)| {
                let key = (c + dc, r + dr);
                let i = *corner_index.entry(key).or_insert_with(|| {
                    particles.push(Particle {
                        position: [key.0 as f64, key.1 as f64],
                        mass: 0.0,
                    });
                    particles.len() - 1
                });
                particles[i].mass += corner_mass;
                i
            })
            .collect();
        for &(a, b) in &EDGES {
            let (i, j) = (idx[a], idx[b]);
            let key = (i.min(j), i.max(j));
            if edge_seen.insert(key, ()).is_none() {
                springs.push(Spring {
                    i,
                    j,
                    rest_length: 1.0,
                    stiffness: params.edge_stiffness,
                    damping: params.damping,
                    actuator: Some(n_actuators),
                });
                n_actuators += 1;
            }
        }
        for &(a, b) in &DIAGONALS {
            springs.push(Spring {
                i: idx[a],
                j: idx[b],
                rest_length: std::f64::consts::SQRT_2,
                stiffness: params.diagonal_stiffness,
                damping: params.damping,
                actuator: None,
            });
        }
    }
    Ok(RobotMesh {
        particles,
        springs,
        n_actuators,
    })
}

impl RobotMesh {
    pub fn total_mass(&self) -> f64 {
        self.particles.iter().map(|p| p.mass).sum()
    }

    pub fn rest_positions(&self) -> Vec<Vec2> {
        self.particles.iter().map(|p| p.position).collect()
    }

    /// Mass-weighted mean of `positions`.
    pub fn center_of_mass(&self, positions: &[Vec2]) -> Vec2 {
        assert_eq!(positions.len(), self.particles.len());
        let mut acc = [0.0; 2];
        let mut total = 0.0;
        for (p, x) in self.particles.iter().zip(positions) {
            acc[0] += p.mass * x[0];
            acc[1] += p.mass * x[1];
            total += p.mass;
        }
        [acc[0] / total, acc[1] / total]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let mesh = build_mesh(&GridDesign::from_cells([(0, 0)]), &MaterialParams::default()).unwrap();
        assert_eq!(mesh.particles.len(), 4);
        assert_eq!(mesh.springs.len(), 6);
        assert_eq!(mesh.n_actuators, 4);
        assert!(mesh.particles.iter().all(|p| p.mass == 0.25));
        assert_eq!(mesh.center_of_mass(&mesh.rest_positions()), [0.5, 0.5]);
    }

    #[test]
    fn two_cells_share_an_edge() {
        let mesh =
            build_mesh(&GridDesign::from_cells([(0, 0), (1, 0)]), &MaterialParams::default()).unwrap();
        assert_eq!(mesh.particles.len(), 6);
        assert_eq!(mesh.springs.len(), 11);
        assert_eq!(mesh.n_actuators, 7);
        let heavy: Vec<Vec2> = mesh
            .particles
            .iter()
            .filter(|p| p.mass == 0.5)
            .map(|p| p.position)
            .collect();
        assert_eq!(heavy, vec![[1.0, 0.0], [1.0, 1.0]]);
        assert_eq!(mesh.total_mass(), 2.0);
    }

    #[test]
    fn diagonals_passive_and_actuators_unique() {
        let d = GridDesign::from_cells([(0, 0), (1, 0), (1, 1), (2, 1)]);
        let mesh = build_mesh(&d, &MaterialParams::default()).unwrap();
        let mut acts: Vec<usize> = mesh.springs.iter().filter_map(|s| s.actuator).collect();
        acts.sort_unstable();
        assert_eq!(acts, (0..mesh.n_actuators).collect::<Vec<_>>());
        for s in &mesh.springs {
            let diag = (s.rest_length - std::f64::consts::SQRT_2).abs() < 1e-15;
            assert_eq!(diag, s.actuator.is_none());
        }
    }

    #[test]
    fn com_of_two_particles() {
        let mesh = RobotMesh {
            particles: vec![
                Particle { position: [0.0, 0.0], mass: 1.0 },
                Particle { position: [2.0, 0.0], mass: 1.0 },
            ],
            springs: vec![],
            n_actuators: 0,
        };
        assert_eq!(mesh.center_of_mass(&mesh.rest_positions()), [1.0, 0.0]);
    }

    #[test]
    fn illegal_design_rejected() {
        let d = GridDesign::from_cells([(0, 0), (2, 0)]);
        assert!(matches!(
            build_mesh(&d, &MaterialParams::default()),
            Err(MeshError::IllegalDesign(_))
        ));
    }
}
