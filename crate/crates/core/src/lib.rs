//! Soft modular robots: textual design scripts, mass-spring meshes, a
//! differentiable locomotion simulator, controller optimization, design
//! metrics and training-data synthesis.

pub mod config;
pub mod control;
pub mod datagen;
pub mod design;
pub mod io;
pub mod mesh;
pub mod metrics;
pub mod render;
pub mod sim;
