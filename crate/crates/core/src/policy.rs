//! Named exploration policies: `cost`, `utility`, `random` and `scripted:<file>`.
//!
//! A policy only ever receives the agent-visible [`Observation`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Observation, OBSTACLE};
use crate::grid::{parse_actions, Action, ParseActionError};
use crate::planners::{cost_policy_next, utility_policy_next, Belief, PlanError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("scripted action list exhausted")]
    ScriptExhausted,
    #[error("no valid action from the current pose")]
    Stuck,
}

#[derive(Debug, thiserror::Error)]
pub enum PolicySpecError {
    #[error("unknown policy `{0}` (expected cost, utility, random or scripted:<file>)")]
    Unknown(String),
    #[error("reading script {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("script {path}: {source}")]
    Parse { path: PathBuf, source: ParseActionError },
}

pub trait Policy: Send {
    fn next_action(&mut self, obs: &Observation) -> Result<Action, PolicyError>;
}

/// A resolvable policy selection. Scripted policies carry their actions so
/// that traces remain self-contained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum PolicyKind {
    Cost,
    Utility,
    Random,
    Scripted { actions: Vec<Action> },
}

impl PolicyKind {
    /// Parses `cost`, `utility`, `random` or `scripted:<file>`, reading the
    /// script file relative to the working directory.
    pub fn parse(name: &str) -> Result<Self, PolicySpecError> {
        match name {
            "cost" => Ok(Self::Cost),
            "utility" => Ok(Self::Utility),
            "random" => Ok(Self::Random),
            other => match other.strip_prefix("scripted:") {
                Some(path) => Self::scripted_from_file(Path::new(path)),
                None => Err(PolicySpecError::Unknown(other.to_string())),
            },
        }
    }

    pub fn scripted_from_file(path: &Path) -> Result<Self, PolicySpecError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| PolicySpecError::Io { path: path.to_owned(), source })?;
        let actions =
            parse_actions(&text).map_err(|source| PolicySpecError::Parse { path: path.to_owned(), source })?;
        Ok(Self::Scripted { actions })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Cost => "cost",
            Self::Utility => "utility",
            Self::Random => "random",
            Self::Scripted { .. } => "scripted",
        }
    }

    /// Instantiates the policy for one episode.
    pub fn build(&self, sensor_radius: u32, seed: u64) -> Box<dyn Policy> {
        match self {
            Self::Cost => Box::new(CostPolicy),
            Self::Utility => Box::new(UtilityPolicy { radius: sensor_radius }),
            Self::Random => Box::new(RandomValid::new(seed)),
            Self::Scripted { actions } => Box::new(Scripted::new(actions.clone())),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PolicyKind {
    type Err = PolicySpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CostPolicy;

impl Policy for CostPolicy {
    fn next_action(&mut self, obs: &Observation) -> Result<Action, PolicyError> {
        Ok(cost_policy_next(&Belief::from_observation(obs)?)?)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct UtilityPolicy {
    pub radius: u32,
}

impl Policy for UtilityPolicy {
    fn next_action(&mut self, obs: &Observation) -> Result<Action, PolicyError> {
        Ok(utility_policy_next(&Belief::from_observation(obs)?, self.radius)?)
    }
}

/// Uniformly random among moves that stay on the grid and avoid known obstacles.
#[derive(Clone, Debug)]
pub struct RandomValid {
    rng: ChaCha8Rng,
}

impl RandomValid {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Policy for RandomValid {
    fn next_action(&mut self, obs: &Observation) -> Result<Action, PolicyError> {
        let pose = obs.robot().ok_or(PlanError::NoRobot)?;
        let mut valid = [Action::North; 4];
        let mut k = 0;
        for a in Action::ALL {
            if pose.step(a, obs.shape()).is_some_and(|c| obs.get(c) != OBSTACLE) {
                valid[k] = a;
                k += 1;
            }
        }
        if k == 0 {
            return Err(PolicyError::Stuck);
        }
        Ok(valid[self.rng.random_range(0..k)])
    }
}

/// Replays a fixed action list.
#[derive(Clone, Debug)]
pub struct Scripted {
    actions: Vec<Action>,
    next: usize,
}

impl Scripted {
    pub fn new(actions: Vec<Action>) -> Self {
        Self { actions, next: 0 }
    }
}

impl Policy for Scripted {
    fn next_action(&mut self, _obs: &Observation) -> Result<Action, PolicyError> {
        let a = self.actions.get(self.next).copied().ok_or(PolicyError::ScriptExhausted)?;
        self.next += 1;
        Ok(a)
    }
}
