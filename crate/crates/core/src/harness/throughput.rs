use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::env::{EnvConfig, Environment};
use crate::policy::{Policy, RandomValid};
use crate::procgen::{DifficultyVector, GenSpec, Requirements, MIN_SIDE};

/// Shortest run accepted as a throughput measurement.
pub const MIN_THROUGHPUT_STEPS: u64 = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub steps: u64,
    pub episodes: u64,
    pub seconds: f64,
    pub steps_per_second: f64,
}

/// Steps a single environment with random valid actions for `steps` steps,
/// resetting whenever an episode ends. Terrain is structured `[2,2,1]`, or
/// empty on grids too small for the structured generator.
pub fn throughput_bench(config: &EnvConfig, steps: u64) -> Result<ThroughputReport, HarnessError> {
    if steps < MIN_THROUGHPUT_STEPS {
        return Err(HarnessError::InvalidArgument(format!(
            "throughput needs at least {MIN_THROUGHPUT_STEPS} steps, got {steps}"
        )));
    }
    let shape = config.shape;
    let spec = if shape.rows.min(shape.cols) >= MIN_SIDE {
        GenSpec::structured(shape, DifficultyVector::new(2, 2, 1)?, config.seed)
    } else {
        GenSpec::empty(shape)
    };
    let terrain = spec.generate(&Requirements::from(config))?;
    let mut env = Environment::new(config.clone(), terrain)?;
    let mut policy = RandomValid::new(config.seed);
    let mut episodes = 1;

    let start = Instant::now();
    for _ in 0..steps {
        let action = policy.next_action(env.observation()).map_err(|e| HarnessError::InvalidArgument(e.to_string()))?;
        let outcome = env.step(action)?;
        if outcome.done {
            env.reset();
            episodes += 1;
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    Ok(ThroughputReport { steps, episodes, seconds, steps_per_second: steps as f64 / seconds.max(f64::MIN_POSITIVE) })
}
