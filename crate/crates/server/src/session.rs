use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use terrascout_core::procgen::Requirements;
use terrascout_core::{Action, DifficultyVector, EnvConfig, Environment, GenSpec, Shape};

use crate::protocol::{ClientMessage, ErrorCode, Frame, Mode, Phase, ServerMessage, SCORED_EPISODES, WARMUP_EPISODES};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct SessionError {
    pub code: ErrorCode,
    pub message: String,
}

impl SessionError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<SessionError> for ServerMessage {
    fn from(e: SessionError) -> Self {
        ServerMessage::error(e.code, e.message)
    }
}

/// One player's environment and protocol state.
///
/// Baseline episode `k` (0-based over warm-up then scored) is generated from
/// seed `seed + k`, so every participant with the same session seed faces the
/// same terrains.
#[derive(Debug)]
pub struct Session {
    id: String,
    mode: Mode,
    template: GenSpec,
    base: EnvConfig,
    env: Environment,
    phase: Phase,
    episode: usize,
    scores: Vec<f64>,
    warmup_scores: Vec<f64>,
    last_used: Instant,
}

impl Session {
    pub fn new(id: String, mode: Mode, template: GenSpec, base: EnvConfig) -> Result<Self, SessionError> {
        let env = build_env(&template, &base, template.seed)?;
        let phase = match mode {
            Mode::FreePlay => Phase::FreePlay,
            Mode::Baseline => Phase::WarmUp(0),
        };
        Ok(Self {
            id,
            mode,
            template,
            base,
            env,
            phase,
            episode: 0,
            scores: Vec::new(),
            warmup_scores: Vec::new(),
            last_used: Instant::now(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    /// Normalised scores of the scored episodes played so far.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn warmup_scores(&self) -> &[f64] {
        &self.warmup_scores
    }

    pub fn frame(&self) -> ServerMessage {
        ServerMessage::Frame { session: self.id.clone(), frame: Frame::initial(&self.env) }
    }

    /// The messages a client receives when the session opens.
    pub fn greeting(&self) -> Vec<ServerMessage> {
        vec![self.frame(), ServerMessage::phase(&self.id, self.phase)]
    }

    pub fn apply(&mut self, action: Action) -> Result<Vec<ServerMessage>, SessionError> {
        if self.phase == Phase::Finished || self.env.is_done() {
            return Err(SessionError::new(ErrorCode::EpisodeFinished, "episode is over"));
        }
        let outcome =
            self.env.step(action).map_err(|e| SessionError::new(ErrorCode::EpisodeFinished, e.to_string()))?;
        let done = outcome.done;
        let mut out =
            vec![ServerMessage::Frame { session: self.id.clone(), frame: Frame::from_outcome(outcome, &self.env) }];
        if done && self.mode == Mode::Baseline {
            let score = self.env.normalized_score();
            self.phase = match self.phase {
                Phase::WarmUp(k) => {
                    self.warmup_scores.push(score);
                    if k + 1 == WARMUP_EPISODES {
                        Phase::Scored(0)
                    } else {
                        Phase::WarmUp(k + 1)
                    }
                }
                Phase::Scored(k) => {
                    self.scores.push(score);
                    if k + 1 == SCORED_EPISODES {
                        Phase::Finished
                    } else {
                        Phase::Scored(k + 1)
                    }
                }
                other => other,
            };
            out.push(ServerMessage::phase(&self.id, self.phase));
            if self.phase != Phase::Finished {
                self.episode += 1;
                self.env = build_env(&self.template, &self.base, self.template.seed.wrapping_add(self.episode as u64))?;
                out.push(self.frame());
            }
        }
        Ok(out)
    }

    pub fn report(&self) -> Result<ServerMessage, SessionError> {
        if self.phase != Phase::Finished {
            return Err(SessionError::new(
                ErrorCode::ProtocolIncomplete,
                format!("report needs a finished baseline session; phase is {}", self.phase.name()),
            ));
        }
        let mean = self.scores.iter().sum::<f64>() / self.scores.len() as f64;
        Ok(ServerMessage::Report { session: self.id.clone(), mean, scores: self.scores.clone() })
    }

    pub fn reset(&mut self, seed: Option<u64>) -> Result<Vec<ServerMessage>, SessionError> {
        if self.mode != Mode::FreePlay {
            return Err(SessionError::new(ErrorCode::BadMessage, "reset is only available in free play"));
        }
        if let Some(seed) = seed {
            self.template = self.template.with_seed(seed);
        }
        self.env = build_env(&self.template, &self.base, self.template.seed)?;
        Ok(vec![self.frame()])
    }
}

/// The environment for one episode, with generation and policy seed `seed`.
pub fn build_env(template: &GenSpec, base: &EnvConfig, seed: u64) -> Result<Environment, SessionError> {
    let spec = template.with_seed(seed);
    let config = EnvConfig { seed, ..spec.configure(base) };
    let invalid = |e: String| SessionError::new(ErrorCode::InvalidConfig, e);
    let terrain = spec.generate(&Requirements::from(&config)).map_err(|e| invalid(e.to_string()))?;
    Environment::new(config, terrain).map_err(|e| invalid(e.to_string()))
}

/// The terrain template a `create` message asks for.
pub fn template_for(shape: Shape, difficulty: Option<DifficultyVector>, seed: u64) -> GenSpec {
    match difficulty {
        Some(d) => GenSpec::structured(shape, d, seed),
        None => GenSpec::random(shape, seed),
    }
}

/// All live sessions. Each session sits behind its own lock, so messages for
/// one session are applied in order while different sessions proceed
/// independently.
#[derive(Debug)]
pub struct SessionManager {
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    idle_timeout: Duration,
    base: EnvConfig,
}

impl Default for SessionManager {
    fn default() -> Self {
        Self::new(DEFAULT_IDLE_TIMEOUT)
    }
}

impl SessionManager {
    pub fn new(idle_timeout: Duration) -> Self {
        Self { sessions: Mutex::default(), idle_timeout, base: EnvConfig::default() }
    }

    /// Environment settings other than shape and bonuses applied to new sessions.
    pub fn with_base_config(mut self, base: EnvConfig) -> Self {
        self.base = base;
        self
    }

    pub fn idle_timeout(&self) -> Duration {
        self.idle_timeout
    }

    fn table(&self) -> MutexGuard<'_, HashMap<String, Arc<Mutex<Session>>>> {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn len(&self) -> usize {
        self.table().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn create(
        &self,
        mode: Mode,
        shape: Shape,
        difficulty: Option<DifficultyVector>,
        seed: u64,
    ) -> Result<(String, Vec<ServerMessage>), SessionError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::new(id.clone(), mode, template_for(shape, difficulty, seed), self.base.clone())?;
        let greeting = session.greeting();
        self.table().insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok((id, greeting))
    }

    /// Runs `f` on the session under its lock and refreshes its idle clock.
    pub fn with_session<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> T) -> Result<T, SessionError> {
        let handle = self
            .table()
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::new(ErrorCode::UnknownSession, format!("no session `{id}`")))?;
        let mut session = handle.lock().unwrap_or_else(|e| e.into_inner());
        session.last_used = Instant::now();
        Ok(f(&mut session))
    }

    pub fn close(&self, id: &str) -> Result<(), SessionError> {
        self.table()
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| SessionError::new(ErrorCode::UnknownSession, format!("no session `{id}`")))
    }

    /// Drops sessions idle for longer than the timeout as of `now`; returns how many.
    pub fn expire_idle(&self, now: Instant) -> usize {
        let mut table = self.table();
        let before = table.len();
        table.retain(|_, s| {
            let s = s.lock().unwrap_or_else(|e| e.into_inner());
            now.saturating_duration_since(s.last_used) <= self.idle_timeout
        });
        before - table.len()
    }

    pub fn handle(&self, message: ClientMessage) -> Vec<ServerMessage> {
        let result = match message {
            ClientMessage::Create { mode, shape, difficulty, seed } => {
                self.create(mode, shape.shape(), difficulty, seed).map(|(_, greeting)| greeting)
            }
            ClientMessage::Action { session, dir } => self.with_session(&session, |s| s.apply(dir)).and_then(|r| r),
            ClientMessage::Report { session } => {
                self.with_session(&session, |s| s.report()).and_then(|r| r).map(|m| vec![m])
            }
            ClientMessage::Reset { session, seed } => self.with_session(&session, |s| s.reset(seed)).and_then(|r| r),
            ClientMessage::Close { session } => self.close(&session).map(|()| vec![ServerMessage::Closed { session }]),
        };
        result.unwrap_or_else(|e| vec![e.into()])
    }

    /// Parses one JSON client message and handles it.
    pub fn handle_text(&self, text: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(m) => self.handle(m),
            Err(e) => vec![ServerMessage::error(ErrorCode::BadMessage, e.to_string())],
        }
    }
}
