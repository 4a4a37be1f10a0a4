//! Wire messages. Every message is a JSON object with a `type` field.
//!
//! Client to server: `create`, `action`, `report`, plus `reset` and `close`.
//! Server to client: `frame`, `phase`, `report`, `closed` and `error`.

use serde::{Deserialize, Serialize};
use terrascout_core::env::{Observation, StepOutcome};
use terrascout_core::{Action, DifficultyVector, Environment, Shape, Termination};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    FreePlay,
    Baseline,
}

/// A grid shape written either as `[rows, cols]` or `{"rows": .., "cols": ..}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShapeField {
    Pair([usize; 2]),
    Named(Shape),
}

impl ShapeField {
    pub fn shape(self) -> Shape {
        match self {
            Self::Pair([rows, cols]) => Shape::new(rows, cols),
            Self::Named(s) => s,
        }
    }
}

impl Default for ShapeField {
    fn default() -> Self {
        Self::Pair([21, 21])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    /// `difficulty` absent or null selects fully random terrain.
    Create {
        mode: Mode,
        #[serde(default)]
        shape: ShapeField,
        #[serde(default)]
        difficulty: Option<DifficultyVector>,
        #[serde(default)]
        seed: u64,
    },
    Action {
        session: String,
        dir: Action,
    },
    Report {
        session: String,
    },
    /// Free play only: start a new episode, optionally on a new seed.
    Reset {
        session: String,
        #[serde(default)]
        seed: Option<u64>,
    },
    Close {
        session: String,
    },
}

/// One environment state as seen by a client.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub observation: Observation,
    pub step: usize,
    pub reward_last: f64,
    pub total_reward: f64,
    pub coverage: f64,
    pub done: bool,
    pub termination: Termination,
}

impl Frame {
    /// The frame right after a reset.
    pub fn initial(env: &Environment) -> Self {
        Self {
            observation: env.observation().clone(),
            step: env.steps(),
            reward_last: 0.0,
            total_reward: env.total_reward(),
            coverage: env.coverage(),
            done: env.is_done(),
            termination: env.termination(),
        }
    }

    pub fn from_outcome(outcome: StepOutcome, env: &Environment) -> Self {
        Self {
            observation: outcome.observation,
            step: env.steps(),
            reward_last: outcome.reward,
            total_reward: env.total_reward(),
            coverage: outcome.info.coverage,
            done: outcome.done,
            termination: outcome.info.termination,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    FreePlay,
    /// Warm-up episodes completed so far.
    WarmUp(usize),
    /// Scored episodes completed so far.
    Scored(usize),
    Finished,
}

pub const WARMUP_EPISODES: usize = 15;
pub const SCORED_EPISODES: usize = 30;

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Self::FreePlay => "FreePlay",
            Self::WarmUp(_) => "WarmUp",
            Self::Scored(_) => "Scored",
            Self::Finished => "Finished",
        }
    }

    /// `(k, of)` progress, absent for free play and once finished.
    pub fn progress(self) -> Option<(usize, usize)> {
        match self {
            Self::WarmUp(k) => Some((k, WARMUP_EPISODES)),
            Self::Scored(k) => Some((k, SCORED_EPISODES)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorCode {
    UnknownSession,
    EpisodeFinished,
    ProtocolIncomplete,
    InvalidConfig,
    BadMessage,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Frame {
        session: String,
        #[serde(flatten)]
        frame: Frame,
    },
    Phase {
        session: String,
        phase: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        of: Option<usize>,
    },
    Report {
        session: String,
        mean: f64,
        scores: Vec<f64>,
    },
    Closed {
        session: String,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
}

impl ServerMessage {
    pub fn phase(session: &str, phase: Phase) -> Self {
        let progress = phase.progress();
        Self::Phase {
            session: session.to_string(),
            phase: phase.name().to_string(),
            k: progress.map(|p| p.0),
            of: progress.map(|p| p.1),
        }
    }

    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Self::Error { code, message: message.into() }
    }
}
