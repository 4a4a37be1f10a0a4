use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{run_episode, EpisodeTrace, HarnessError};
use crate::env::{EnvConfig, Termination};
use crate::parallel::{map_indexed, Parallelism};
use crate::policy::PolicyKind;
use crate::procgen::GenSpec;

pub const METRICS_HEADER: &str = "episode,seed,steps,distance,total_reward,normalized_score,coverage,termination";

/// Seed of episode `i` in a batch whose template carries `base`.
pub fn episode_seed(base: u64, i: usize) -> u64 {
    base.wrapping_add(i as u64)
}

/// Mean and population standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchAggregate {
    pub episodes: usize,
    pub completed: usize,
    pub invalid: usize,
    pub step_limit: usize,
    /// Episodes the policy stopped early.
    pub stopped: usize,
    pub normalized_score: Stat,
    pub total_reward: Stat,
    pub steps: Stat,
    pub distance: Stat,
    pub coverage: Stat,
    /// Always `"population"`.
    pub std_kind: String,
}

impl BatchAggregate {
    pub fn of(traces: &[EpisodeTrace]) -> Self {
        let count = |t: Termination| traces.iter().filter(|x| x.termination == t).count();
        Self {
            episodes: traces.len(),
            completed: count(Termination::Complete),
            invalid: count(Termination::Invalid),
            step_limit: count(Termination::StepLimit),
            stopped: count(Termination::None),
            normalized_score: Stat::of(traces.iter().map(|t| t.normalized_score)),
            total_reward: Stat::of(traces.iter().map(|t| t.total_reward)),
            steps: Stat::of(traces.iter().map(|t| t.steps as f64)),
            distance: Stat::of(traces.iter().map(|t| t.distance() as f64)),
            coverage: Stat::of(traces.iter().map(|t| t.coverage_final)),
            std_kind: "population".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub episode: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchReport {
    /// Successful episodes in episode order.
    pub traces: Vec<EpisodeTrace>,
    /// Episode index of each trace.
    pub indices: Vec<usize>,
    pub failures: Vec<BatchFailure>,
    pub aggregate: BatchAggregate,
}

/// Runs `episodes` episodes; episode `i` uses seed `template.seed + i` for
/// both terrain generation and the policy. Results do not depend on
/// `parallelism`. Failed episodes are reported, not fatal.
pub fn run_batch(
    template: &GenSpec,
    config: &EnvConfig,
    policy: &PolicyKind,
    episodes: usize,
    parallelism: Parallelism,
) -> Result<BatchReport, HarnessError> {
    if episodes == 0 {
        return Err(HarnessError::InvalidArgument("a batch needs at least one episode".into()));
    }
    let results = map_indexed(episodes, parallelism, |i| {
        let seed = episode_seed(template.seed, i);
        let spec = template.with_seed(seed);
        let config = EnvConfig { seed, ..config.clone() };
        run_episode(&spec, &config, policy)
    });
    let mut traces = Vec::with_capacity(episodes);
    let mut indices = Vec::with_capacity(episodes);
    let mut failures = Vec::new();
    for (i, result) in results.into_iter().enumerate() {
        match result {
            Ok(t) => {
                traces.push(t);
                indices.push(i);
            }
            Err(e) => {
                failures.push(BatchFailure { episode: i, seed: episode_seed(template.seed, i), error: e.to_string() })
            }
        }
    }
    let aggregate = BatchAggregate::of(&traces);
    Ok(BatchReport { traces, indices, failures, aggregate })
}

/// The per-episode metrics table, one row per trace, with `episode` taken from
/// `indices` (or the position when `indices` is empty).
pub fn metrics_csv(traces: &[EpisodeTrace], indices: &[usize]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for (k, t) in traces.iter().enumerate() {
        let episode = indices.get(k).copied().unwrap_or(k);
        let _ = writeln!(
            out,
            "{episode},{},{},{},{},{},{},{}",
            t.gen_spec.seed,
            t.steps,
            t.distance(),
            t.total_reward,
            t.normalized_score,
            t.coverage_final,
            t.termination.as_str()
        );
    }
    out
}
