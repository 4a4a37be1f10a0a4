use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::env::{EnvConfig, Environment, Termination};
use crate::grid::{Action, Cell};
use crate::policy::PolicyKind;
use crate::procgen::{GenSpec, Requirements};

/// A replayable record of one episode.
///
/// `actions`, `rewards` and `poses[1..]` are aligned per step; `poses[0]` is
/// the start. A `termination` of `none` means the policy stopped before the
/// environment ended the episode (no reachable frontier, exhausted script).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub gen_spec: GenSpec,
    pub config: EnvConfig,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub poses: Vec<Cell>,
    pub termination: Termination,
    pub total_reward: f64,
    pub normalized_score: f64,
    pub coverage_final: f64,
    pub steps: usize,
}

impl EpisodeTrace {
    /// Valid moves executed; an invalid final action moves nowhere.
    pub fn distance(&self) -> usize {
        self.steps - usize::from(self.termination == Termination::Invalid)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let trace: Self = serde_json::from_str(text).map_err(|e| HarnessError::MalformedTrace(e.to_string()))?;
        trace.check()?;
        Ok(trace)
    }

    fn check(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::MalformedTrace(m));
        if self.actions.len() != self.steps || self.rewards.len() != self.steps || self.poses.len() != self.steps + 1 {
            return bad(format!(
                "lengths disagree: {} steps, {} actions, {} rewards, {} poses",
                self.steps,
                self.actions.len(),
                self.rewards.len(),
                self.poses.len()
            ));
        }
        let sum: f64 = self.rewards.iter().sum();
        if sum != self.total_reward {
            return bad(format!("total_reward {} differs from reward sum {sum}", self.total_reward));
        }
        Ok(())
    }
}

/// Generates the terrain for `gen_spec`, then drives `policy` until the
/// episode ends or the policy has nothing left to do.
pub fn run_episode(gen_spec: &GenSpec, config: &EnvConfig, policy: &PolicyKind) -> Result<EpisodeTrace, HarnessError> {
    let terrain = gen_spec.generate(&Requirements::from(config))?;
    let mut env = Environment::new(config.clone(), terrain)?;
    let mut agent = policy.build(config.sensor_radius, config.seed);
    let mut actions = Vec::new();
    let mut rewards = Vec::new();
    let mut poses = vec![env.pose()];
    while !env.is_done() {
        let Ok(action) = agent.next_action(env.observation()) else { break };
        let (reward, _) = env.advance(action)?;
        actions.push(action);
        rewards.push(reward);
        poses.push(env.pose());
    }
    Ok(EpisodeTrace {
        gen_spec: gen_spec.clone(),
        config: config.clone(),
        steps: actions.len(),
        actions,
        rewards,
        poses,
        termination: env.termination(),
        total_reward: env.total_reward(),
        normalized_score: env.normalized_score(),
        coverage_final: env.coverage(),
    })
}

/// A trace re-executed through a fresh environment.
#[derive(Clone, Debug)]
pub struct Replay {
    pub rewards: Vec<f64>,
    pub poses: Vec<Cell>,
    /// Coverage after reset and after every step (`steps + 1` entries).
    pub coverage: Vec<f64>,
    /// Cumulative valid moves, aligned with `coverage`.
    pub distance: Vec<usize>,
    /// The environment as left by the final action.
    pub env: Environment,
}

pub fn replay(trace: &EpisodeTrace) -> Result<Replay, HarnessError> {
    let terrain = trace.gen_spec.generate(&Requirements::from(&trace.config))?;
    let mut env = Environment::new(trace.config.clone(), terrain)?;
    let mut out = Replay {
        rewards: Vec::with_capacity(trace.steps),
        poses: vec![env.pose()],
        coverage: vec![env.coverage()],
        distance: vec![0],
        env: env.clone(),
    };
    for (step, action) in trace.actions.iter().enumerate() {
        let (reward, _) =
            env.advance(*action).map_err(|e| HarnessError::ReplayDiverged { step, detail: e.to_string() })?;
        out.rewards.push(reward);
        out.poses.push(env.pose());
        out.coverage.push(env.coverage());
        out.distance.push(env.distance());
    }
    out.env = env;
    Ok(out)
}

/// Replays and checks rewards, poses and termination against the record.
pub fn verify_replay(trace: &EpisodeTrace) -> Result<Replay, HarnessError> {
    let r = replay(trace)?;
    for step in 0..trace.steps {
        if r.rewards[step] != trace.rewards[step] || r.poses[step + 1] != trace.poses[step + 1] {
            return Err(HarnessError::ReplayDiverged {
                step,
                detail: format!(
                    "recorded reward {} at {}, replayed {} at {}",
                    trace.rewards[step],
                    trace.poses[step + 1],
                    r.rewards[step],
                    r.poses[step + 1]
                ),
            });
        }
    }
    if r.env.termination() != trace.termination {
        return Err(HarnessError::ReplayDiverged {
            step: trace.steps,
            detail: format!("termination {:?} vs recorded {:?}", r.env.termination(), trace.termination),
        });
    }
    Ok(r)
}
