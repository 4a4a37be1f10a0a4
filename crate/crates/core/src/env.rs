//! The exploration environment: episode lifecycle, discovery bookkeeping,
//! observation encoding and rewards.
//!
//! Per step the reward is
//!
//! * `-n` for a move off the grid or into an obstacle (the episode ends),
//! * otherwise `newly_discovered - r_move`, plus a one-off bonus of `n` on the
//!   step that lifts coverage to at least `beta` (the episode ends).
//!
//! With bonuses disabled neither `n` term is applied; an invalid move then
//! costs `r_move` and still ends the episode.

use serde::{Deserialize, Serialize};

use crate::grid::{Action, Cell, Shape};
use crate::sensing::SensorFootprint;
use crate::terrain::{CellKind, TerrainMap};

/// Observation value of an undiscovered cell.
pub const UNKNOWN: f32 = 0.0;
/// Observation value of a discovered free cell.
pub const FREE: f32 = 0.3;
/// Observation value of the robot's cell.
pub const ROBOT: f32 = 0.6;
/// Observation value of a discovered obstacle.
pub const OBSTACLE: f32 = 1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("terrain is {terrain} but the configuration expects {config}")]
    ShapeMismatch { config: Shape, terrain: Shape },
    #[error("start cell {0} is an obstacle")]
    StartBlocked(Cell),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("episode already finished")]
    EpisodeFinished,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub shape: Shape,
    /// Maximum sensing distance `d`, in cells.
    pub sensor_radius: u32,
    /// Coverage fraction at which the episode completes.
    pub beta: f64,
    /// Per-step movement penalty.
    pub r_move: f64,
    /// Whether the completion bonus and the invalid-move penalty are applied.
    pub bonuses_enabled: bool,
    pub max_steps: usize,
    pub start: Cell,
    pub seed: u64,
}

impl EnvConfig {
    /// Defaults for a grid of the given shape: `d = 6`, `beta = 0.99`,
    /// `r_move = 0.5`, bonuses on, start at `(0, 0)` and a `4 n` step cap.
    pub fn new(shape: Shape) -> Self {
        Self {
            shape,
            sensor_radius: 6,
            beta: 0.99,
            r_move: 0.5,
            bonuses_enabled: true,
            max_steps: 4 * shape.cells(),
            start: Cell::new(0, 0),
            seed: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.shape.cells()
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |msg: String| Err(EnvError::InvalidConfig(msg));
        if self.shape.cells() == 0 {
            return bad(format!("empty grid {}", self.shape));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return bad(format!("beta must lie in (0, 1], got {}", self.beta));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if !self.r_move.is_finite() || self.r_move < 0.0 {
            return bad(format!("r_move must be a non-negative number, got {}", self.r_move));
        }
        if !self.shape.contains(self.start) {
            return bad(format!("start {} lies outside {}", self.start, self.shape));
        }
        Ok(())
    }
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self::new(Shape::square(21))
    }
}

/// Whether `discovered` cells out of `n` meet the completion fraction.
#[inline]
pub fn coverage_reached(discovered: usize, n: usize, beta: f64) -> bool {
    discovered as f64 >= beta * n as f64
}

/// Maps an episode return onto `[0, 1]`: an immediate invalid move (`-n`)
/// scores 0 and the theoretical maximum (`2 n`) scores 1.
pub fn normalized_score(total_reward: f64, n: usize) -> f64 {
    let n = n as f64;
    ((total_reward + n) / (3.0 * n)).clamp(0.0, 1.0)
}

/// Per-cell record of what has ever been sensed. Never cleared mid-episode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscoveryMask {
    shape: Shape,
    discovered: Vec<bool>,
    count: usize,
}

impl DiscoveryMask {
    pub fn new(shape: Shape) -> Self {
        Self { shape, discovered: vec![false; shape.cells()], count: 0 }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn coverage(&self) -> f64 {
        self.count as f64 / self.shape.cells() as f64
    }

    #[inline]
    pub fn is_discovered(&self, cell: Cell) -> bool {
        self.discovered[self.shape.index(cell)]
    }

    /// Marks a cell; returns true if it was previously undiscovered.
    #[inline]
    pub fn mark_index(&mut self, index: usize) -> bool {
        let slot = &mut self.discovered[index];
        let fresh = !*slot;
        *slot = true;
        self.count += fresh as usize;
        fresh
    }

    pub fn mark(&mut self, cell: Cell) -> bool {
        self.mark_index(self.shape.index(cell))
    }

    pub fn discovered(&self) -> impl Iterator<Item = Cell> + '_ {
        self.discovered.iter().enumerate().filter(|(_, d)| **d).map(|(i, _)| self.shape.cell(i))
    }

    fn clear(&mut self) {
        self.discovered.fill(false);
        self.count = 0;
    }
}

/// The agent-visible grid, row-major, with values in {0, 0.3, 0.6, 1}.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    shape: Shape,
    values: Vec<f32>,
    robot: Option<Cell>,
}

impl Observation {
    pub fn from_values(shape: Shape, values: Vec<f32>) -> Option<Self> {
        if values.len() != shape.cells() {
            return None;
        }
        let robot = values.iter().position(|v| *v == ROBOT).map(|i| shape.cell(i));
        Some(Self { shape, values, robot })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    #[inline]
    pub fn get(&self, cell: Cell) -> f32 {
        self.values[self.shape.index(cell)]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// The cell holding the robot marker.
    pub fn robot(&self) -> Option<Cell> {
        self.robot
    }

    pub fn rows(&self) -> Vec<Vec<f32>> {
        self.values.chunks(self.shape.cols).map(<[f32]>::to_vec).collect()
    }

    /// One character per cell: `?` unknown, `.` free, `R` robot, `#` obstacle.
    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.values.len() + self.shape.rows);
        for row in self.values.chunks(self.shape.cols) {
            for v in row {
                out.push(match *v {
                    FREE => '.',
                    ROBOT => 'R',
                    OBSTACLE => '#',
                    _ => '?',
                });
            }
            out.push('\n');
        }
        out
    }
}

impl Serialize for Observation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.values.chunks(self.shape.cols))
    }
}

impl<'de> Deserialize<'de> for Observation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f32>>::deserialize(deserializer)?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(serde::de::Error::custom("observation must be a non-empty rectangular grid"));
        }
        Ok(Self::from_values(Shape::new(rows.len(), cols), rows.concat()).expect("rectangular"))
    }
}

#[inline]
fn encode(kind: CellKind) -> f32 {
    match kind {
        CellKind::Free => FREE,
        CellKind::Obstacle => OBSTACLE,
    }
}

/// Builds the observation from scratch: unknown cells 0, discovered cells by
/// kind, then the pose overwritten with the robot marker.
pub fn encode_observation(terrain: &TerrainMap, mask: &DiscoveryMask, pose: Cell) -> Observation {
    let shape = terrain.shape();
    let mut values: Vec<f32> =
        (0..shape.cells()).map(|i| if mask.discovered[i] { encode(terrain.kind_at(i)) } else { UNKNOWN }).collect();
    values[shape.index(pose)] = ROBOT;
    Observation { shape, values, robot: Some(pose) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    None,
    Invalid,
    Complete,
    StepLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::None => "none",
            Termination::Invalid => "invalid",
            Termination::Complete => "complete",
            Termination::StepLimit => "step_limit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub newly_discovered: usize,
    pub coverage: f64,
    pub distance_traveled: usize,
    pub termination: Termination,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// One exploration episode over a fixed terrain.
///
/// Owned, single-driver state; instances are `Send` and independent.
#[derive(Clone, Debug)]
pub struct Environment {
    config: EnvConfig,
    terrain: TerrainMap,
    footprint: SensorFootprint,
    mask: DiscoveryMask,
    observation: Observation,
    pose: Cell,
    steps: usize,
    distance: usize,
    total_reward: f64,
    initial_discovered: usize,
    termination: Termination,
}

impl Environment {
    /// Validates the pair and starts the first episode.
    pub fn new(config: EnvConfig, terrain: TerrainMap) -> Result<Self, EnvError> {
        config.validate()?;
        if terrain.shape() != config.shape {
            return Err(EnvError::ShapeMismatch { config: config.shape, terrain: terrain.shape() });
        }
        if terrain.is_obstacle(config.start) {
            return Err(EnvError::StartBlocked(config.start));
        }
        let shape = config.shape;
        let mut env = Self {
            footprint: SensorFootprint::new(config.sensor_radius, shape.cols),
            mask: DiscoveryMask::new(shape),
            observation: Observation { shape, values: vec![UNKNOWN; shape.cells()], robot: None },
            pose: config.start,
            steps: 0,
            distance: 0,
            total_reward: 0.0,
            initial_discovered: 0,
            termination: Termination::None,
            config,
            terrain,
        };
        env.reset();
        Ok(env)
    }

    /// Restarts the episode on the same terrain. Cells sensed here are not rewarded.
    pub fn reset(&mut self) -> Observation {
        self.mask.clear();
        self.observation.values.fill(UNKNOWN);
        self.pose = self.config.start;
        self.steps = 0;
        self.distance = 0;
        self.total_reward = 0.0;
        self.termination = Termination::None;
        self.sense();
        self.observation.values[self.config.shape.index(self.pose)] = ROBOT;
        self.observation.robot = Some(self.pose);
        self.initial_discovered = self.mask.count();
        self.observation.clone()
    }

    /// Swaps in a new terrain and restarts.
    pub fn reset_with(&mut self, terrain: TerrainMap) -> Result<Observation, EnvError> {
        if terrain.shape() != self.config.shape {
            return Err(EnvError::ShapeMismatch { config: self.config.shape, terrain: terrain.shape() });
        }
        if terrain.is_obstacle(self.config.start) {
            return Err(EnvError::StartBlocked(self.config.start));
        }
        self.terrain = terrain;
        Ok(self.reset())
    }

    fn sense(&mut self) -> usize {
        let Self { footprint, terrain, mask, observation, pose, .. } = self;
        let mut fresh = 0;
        footprint.sweep(terrain, *pose, |i| {
            if mask.mark_index(i) {
                fresh += 1;
                observation.values[i] = encode(terrain.kind_at(i));
            }
        });
        fresh
    }

    pub fn step(&mut self, action: Action) -> Result<StepOutcome, EnvError> {
        let (reward, newly) = self.advance(action)?;
        Ok(StepOutcome {
            observation: self.observation.clone(),
            reward,
            done: self.is_done(),
            info: StepInfo {
                newly_discovered: newly,
                coverage: self.coverage(),
                distance_traveled: self.distance,
                termination: self.termination,
            },
        })
    }

    /// Applies one action and returns `(reward, newly_discovered)` without
    /// cloning the observation; read it through [`Environment::observation`].
    pub fn advance(&mut self, action: Action) -> Result<(f64, usize), EnvError> {
        if self.termination != Termination::None {
            return Err(EnvError::EpisodeFinished);
        }
        self.steps += 1;
        let n = self.config.n();
        let target = self.pose.step(action, self.config.shape).filter(|c| self.terrain.is_free(*c));
        let (reward, newly) = match target {
            None => {
                self.termination = Termination::Invalid;
                let penalty = if self.config.bonuses_enabled { n as f64 } else { self.config.r_move };
                (-penalty, 0)
            }
            Some(next) => {
                let shape = self.config.shape;
                self.observation.values[shape.index(self.pose)] = FREE;
                self.pose = next;
                self.distance += 1;
                let newly = self.sense();
                self.observation.values[shape.index(next)] = ROBOT;
                self.observation.robot = Some(next);
                let mut reward = newly as f64 - self.config.r_move;
                if coverage_reached(self.mask.count(), n, self.config.beta) {
                    self.termination = Termination::Complete;
                    if self.config.bonuses_enabled {
                        reward += n as f64;
                    }
                } else if self.steps >= self.config.max_steps {
                    self.termination = Termination::StepLimit;
                }
                (reward, newly)
            }
        };
        self.total_reward += reward;
        Ok((reward, newly))
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn terrain(&self) -> &TerrainMap {
        &self.terrain
    }

    pub fn mask(&self) -> &DiscoveryMask {
        &self.mask
    }

    pub fn observation(&self) -> &Observation {
        &self.observation
    }

    pub fn pose(&self) -> Cell {
        self.pose
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn total_reward(&self) -> f64 {
        self.total_reward
    }

    /// Discovered count right after the last reset.
    pub fn initial_discovered(&self) -> usize {
        self.initial_discovered
    }

    pub fn coverage(&self) -> f64 {
        self.mask.coverage()
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn is_done(&self) -> bool {
        self.termination != Termination::None
    }

    pub fn normalized_score(&self) -> f64 {
        normalized_score(self.total_reward, self.config.n())
    }
}
