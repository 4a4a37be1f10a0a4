//! Episode runner, batch experiments and the artifacts derived from them:
//! traces, metrics tables, heatmaps, coverage curves and throughput.

mod batch;
mod curve;
mod episode;
mod heatmap;
mod throughput;

pub use batch::{
    episode_seed, metrics_csv, run_batch, BatchAggregate, BatchFailure, BatchReport, Stat, METRICS_HEADER,
};
pub use curve::{aggregate_curves, episode_curve, CoverageCurve, CurvePoint, EpisodeCurve};
pub use episode::{replay, run_episode, verify_replay, EpisodeTrace, Replay};
pub use heatmap::{accumulate_heatmap, Heatmap};
pub use throughput::{throughput_bench, ThroughputReport, MIN_THROUGHPUT_STEPS};

use crate::env::EnvError;
use crate::grid::Shape;
use crate::procgen::ProcgenError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Generation(#[from] ProcgenError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("traces mix grid shapes {expected} and {found}")]
    ShapeMismatch { expected: Shape, found: Shape },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("replay diverged at step {step}: {detail}")]
    ReplayDiverged { step: usize, detail: String },
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
}
