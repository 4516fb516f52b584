//! Experiment harness around `ehrx-core`: TOML configuration, parameter
//! sweeps with parallel execution, Monte Carlo validation of the collision
//! statistics, and deterministic CSV emission.

pub mod config;
pub mod csvout;
pub mod sweep;
pub mod validate;
