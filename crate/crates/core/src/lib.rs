//! Grid terrain exploration: a partially observable coverage environment,
//! procedural terrain generation, frontier planners and an experiment harness.

pub mod env;
pub mod grid;
pub mod harness;
pub mod parallel;
pub mod planners;
pub mod policy;
pub mod procgen;
pub mod sensing;
pub mod terrain;

pub use env::{EnvConfig, EnvError, Environment, Observation, StepInfo, StepOutcome, Termination};
pub use grid::{Action, Cell, Shape};
pub use harness::{run_batch, run_episode, EpisodeTrace, HarnessError};
pub use parallel::Parallelism;
pub use policy::{Policy, PolicyKind};
pub use procgen::{DifficultyVector, GenSpec, TerrainMode};
pub use terrain::TerrainMap;
