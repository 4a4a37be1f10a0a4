//! Seeded terrain generation.
//!
//! Structured terrains place nine rectangular obstacle clusters around a 3x3
//! lattice of fundamental positions. The difficulty vector `[d_t, d_m, d_b]`
//! controls how far each cluster drifts from its lattice point (`d_t`), how
//! large the rectangles may grow (`d_m`) and whether terminal bonuses apply
//! (`d_b`, consumed by the environment, not the generator).
//!
//! Every generated terrain keeps the start cell and its 4-neighbourhood free
//! and must pass [`is_solvable`]. Attempt `k` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `k`; up to
//! [`MAX_ATTEMPTS`] attempts are made.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{coverage_reached, EnvConfig};
use crate::grid::{Action, Cell, Shape};
use crate::sensing::SensorFootprint;
use crate::terrain::{CellKind, TerrainMap};

pub const MAX_ATTEMPTS: u32 = 100;
pub const MIN_SIDE: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProcgenError {
    #[error("grid {0} is too small for procedural generation (minimum {MIN_SIDE}x{MIN_SIDE})")]
    ShapeTooSmall(Shape),
    #[error("invalid difficulty vector: {0}")]
    InvalidDifficulty(String),
    #[error("no solvable terrain after {0} attempts")]
    GenerationFailed(u32),
    #[error("fixed terrain is {terrain} but {expected} was requested")]
    ShapeMismatch { expected: Shape, terrain: Shape },
}

/// `[d_t, d_m, d_b]` with `d_t` in 1..=3 and `d_m`, `d_b` in 1..=2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u8; 3]", into = "[u8; 3]")]
pub struct DifficultyVector {
    topology: u8,
    morphology: u8,
    bonus: u8,
}

impl DifficultyVector {
    pub fn new(topology: u8, morphology: u8, bonus: u8) -> Result<Self, ProcgenError> {
        if !(1..=3).contains(&topology) || !(1..=2).contains(&morphology) || !(1..=2).contains(&bonus) {
            return Err(ProcgenError::InvalidDifficulty(format!(
                "[{topology},{morphology},{bonus}] (d_t in 1..=3, d_m and d_b in 1..=2)"
            )));
        }
        Ok(Self { topology, morphology, bonus })
    }

    /// All 12 legal vectors in lexicographic order.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(12);
        for t in 1..=3 {
            for m in 1..=2 {
                for b in 1..=2 {
                    out.push(Self { topology: t, morphology: m, bonus: b });
                }
            }
        }
        out
    }

    pub fn topology(self) -> u8 {
        self.topology
    }

    pub fn morphology(self) -> u8 {
        self.morphology
    }

    pub fn bonus(self) -> u8 {
        self.bonus
    }

    /// `d_b = 1` keeps the completion bonus and invalid penalty; `d_b = 2` drops both.
    pub fn bonuses_enabled(self) -> bool {
        self.bonus == 1
    }
}

impl TryFrom<[u8; 3]> for DifficultyVector {
    type Error = ProcgenError;

    fn try_from([t, m, b]: [u8; 3]) -> Result<Self, Self::Error> {
        Self::new(t, m, b)
    }
}

impl From<DifficultyVector> for [u8; 3] {
    fn from(dv: DifficultyVector) -> Self {
        [dv.topology, dv.morphology, dv.bonus]
    }
}

impl fmt::Display for DifficultyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.topology, self.morphology, self.bonus)
    }
}

impl FromStr for DifficultyVector {
    type Err = ProcgenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim_matches(|c| c == '[' || c == ']').split(',').map(str::trim).collect();
        let bad = || ProcgenError::InvalidDifficulty(format!("`{s}` (expected dt,dm,db)"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut v = [0u8; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| bad())?;
        }
        Self::try_from(v)
    }
}

/// Where an episode's terrain comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerrainMode {
    Structured {
        difficulty: DifficultyVector,
    },
    FullyRandom,
    /// No obstacles.
    Empty,
    /// A given map, used as-is (no solvability check).
    Fixed {
        terrain: TerrainMap,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub shape: Shape,
    pub mode: TerrainMode,
    pub seed: u64,
}

impl GenSpec {
    pub fn structured(shape: Shape, difficulty: DifficultyVector, seed: u64) -> Self {
        Self { shape, mode: TerrainMode::Structured { difficulty }, seed }
    }

    pub fn random(shape: Shape, seed: u64) -> Self {
        Self { shape, mode: TerrainMode::FullyRandom, seed }
    }

    pub fn empty(shape: Shape) -> Self {
        Self { shape, mode: TerrainMode::Empty, seed: 0 }
    }

    pub fn fixed(terrain: TerrainMap) -> Self {
        Self { shape: terrain.shape(), mode: TerrainMode::Fixed { terrain }, seed: 0 }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    /// `base` adjusted for this terrain request: the grid shape, and for structured terrain
    /// the bonus toggle `d_b`.
    pub fn configure(&self, base: &EnvConfig) -> EnvConfig {
        let mut config = EnvConfig { shape: self.shape, ..base.clone() };
        if base.shape != self.shape {
            config.max_steps = 4 * self.shape.cells();
        }
        if let Some(d) = self.difficulty() {
            config.bonuses_enabled = d.bonuses_enabled();
        }
        config
    }

    pub fn difficulty(&self) -> Option<DifficultyVector> {
        match self.mode {
            TerrainMode::Structured { difficulty } => Some(difficulty),
            _ => None,
        }
    }

    pub fn generate(&self, req: &Requirements) -> Result<TerrainMap, ProcgenError> {
        match &self.mode {
            TerrainMode::Structured { difficulty } => generate_structured(self.shape, *difficulty, self.seed, req),
            TerrainMode::FullyRandom => generate_random(self.shape, self.seed, req),
            TerrainMode::Empty => Ok(TerrainMap::empty(self.shape)),
            TerrainMode::Fixed { terrain } if terrain.shape() == self.shape => Ok(terrain.clone()),
            TerrainMode::Fixed { terrain } => {
                Err(ProcgenError::ShapeMismatch { expected: self.shape, terrain: terrain.shape() })
            }
        }
    }
}

/// What a generated terrain must satisfy for a given environment configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Requirements {
    pub start: Cell,
    pub sensor_radius: u32,
    pub beta: f64,
}

impl From<&EnvConfig> for Requirements {
    fn from(c: &EnvConfig) -> Self {
        Self { start: c.start, sensor_radius: c.sensor_radius, beta: c.beta }
    }
}

impl Default for Requirements {
    fn default() -> Self {
        Self::from(&EnvConfig::default())
    }
}

fn check_shape(shape: Shape) -> Result<(), ProcgenError> {
    if shape.rows < MIN_SIDE || shape.cols < MIN_SIDE {
        return Err(ProcgenError::ShapeTooSmall(shape));
    }
    Ok(())
}

/// The 3x3 lattice `(floor((i+1) rows / 4), floor((j+1) cols / 4))`, row-major.
pub fn fundamental_positions(shape: Shape) -> Result<[Cell; 9], ProcgenError> {
    check_shape(shape)?;
    let mut out = [Cell::new(0, 0); 9];
    for i in 0..3 {
        for j in 0..3 {
            out[i * 3 + j] = Cell::new((i + 1) * shape.rows / 4, (j + 1) * shape.cols / 4);
        }
    }
    Ok(out)
}

/// Chebyshev drift radius `d_t * ceil(side / 21) * 2 - 1`: 1, 3, 5 at side 21.
pub fn topology_radius(side: usize, topology: u8) -> usize {
    topology as usize * side.div_ceil(21) * 2 - 1
}

/// Largest rectangle side: `floor(side / 10)` for `d_m = 1`, `ceil(side / 7)`
/// for `d_m = 2` (2 and 3 at side 21), never below 1.
pub fn morphology_side(side: usize, morphology: u8) -> usize {
    let s = match morphology {
        1 => side / 10,
        _ => side.div_ceil(7),
    };
    s.max(1)
}

/// An axis-aligned block of cells, clipped to the grid when painted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl Rect {
    fn cells(self, shape: Shape) -> impl Iterator<Item = Cell> {
        let rows = self.top..(self.top + self.height).min(shape.rows);
        let cols = self.left..(self.left + self.width).min(shape.cols);
        rows.flat_map(move |r| cols.clone().map(move |c| Cell::new(r, c)))
    }
}

/// A structured terrain together with the draws that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredLayout {
    pub terrain: TerrainMap,
    /// Cluster anchors (top-left corner of each rectangle), lattice order.
    pub anchors: [Cell; 9],
    pub rects: [Rect; 9],
    /// Zero-based attempt that produced the accepted terrain.
    pub attempt: u32,
}

fn attempt_rng(seed: u64, attempt: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt as u64);
    rng
}

fn start_zone(start: Cell, shape: Shape) -> impl Iterator<Item = Cell> {
    std::iter::once(start).chain(Action::ALL.into_iter().filter_map(move |a| start.step(a, shape)))
}

fn drift(rng: &mut ChaCha8Rng, centre: usize, radius: usize, len: usize) -> usize {
    let offset = rng.random_range(-(radius as i64)..=radius as i64) as isize;
    centre.saturating_add_signed(offset).min(len - 1)
}

pub fn generate_structured_layout(
    shape: Shape,
    difficulty: DifficultyVector,
    seed: u64,
    req: &Requirements,
) -> Result<StructuredLayout, ProcgenError> {
    let lattice = fundamental_positions(shape)?;
    let (rho_r, rho_c) =
        (topology_radius(shape.rows, difficulty.topology), topology_radius(shape.cols, difficulty.topology));
    let (s_r, s_c) =
        (morphology_side(shape.rows, difficulty.morphology), morphology_side(shape.cols, difficulty.morphology));
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = attempt_rng(seed, attempt);
        let mut terrain = TerrainMap::empty(shape);
        let mut anchors = lattice;
        let mut rects = [Rect { top: 0, left: 0, height: 0, width: 0 }; 9];
        for (k, base) in lattice.iter().enumerate() {
            let anchor =
                Cell::new(drift(&mut rng, base.row, rho_r, shape.rows), drift(&mut rng, base.col, rho_c, shape.cols));
            let rect = Rect {
                top: anchor.row,
                left: anchor.col,
                height: rng.random_range(1..=s_r),
                width: rng.random_range(1..=s_c),
            };
            for c in rect.cells(shape) {
                terrain.set(c, CellKind::Obstacle);
            }
            anchors[k] = anchor;
            rects[k] = rect;
        }
        for c in start_zone(req.start, shape) {
            terrain.set(c, CellKind::Free);
        }
        if is_solvable(&terrain, req.start, req.sensor_radius, req.beta) {
            return Ok(StructuredLayout { terrain, anchors, rects, attempt });
        }
    }
    Err(ProcgenError::GenerationFailed(MAX_ATTEMPTS))
}

pub fn generate_structured(
    shape: Shape,
    difficulty: DifficultyVector,
    seed: u64,
    req: &Requirements,
) -> Result<TerrainMap, ProcgenError> {
    generate_structured_layout(shape, difficulty, seed, req).map(|l| l.terrain)
}

/// Unstructured terrain: an obstacle budget drawn uniformly from
/// `[ceil(0.05 n), floor(0.15 n)]` is spent on random rectangles with sides in
/// 1..=3. The start zone is never painted, so the final obstacle count equals
/// the budget exactly.
pub fn generate_random(shape: Shape, seed: u64, req: &Requirements) -> Result<TerrainMap, ProcgenError> {
    check_shape(shape)?;
    let n = shape.cells();
    let (lo, hi) = ((n * 5).div_ceil(100), n * 15 / 100);
    let protected: Vec<Cell> = start_zone(req.start, shape).collect();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = attempt_rng(seed, attempt);
        let budget = rng.random_range(lo..=hi);
        let mut terrain = TerrainMap::empty(shape);
        let mut placed = 0;
        while placed < budget {
            let rect = Rect {
                top: rng.random_range(0..shape.rows),
                left: rng.random_range(0..shape.cols),
                height: rng.random_range(1..=3),
                width: rng.random_range(1..=3),
            };
            for c in rect.cells(shape) {
                if placed == budget {
                    break;
                }
                if terrain.is_free(c) && !protected.contains(&c) {
                    terrain.set(c, CellKind::Obstacle);
                    placed += 1;
                }
            }
        }
        if is_solvable(&terrain, req.start, req.sensor_radius, req.beta) {
            return Ok(terrain);
        }
    }
    Err(ProcgenError::GenerationFailed(MAX_ATTEMPTS))
}

/// Free cells 4-connected to `start`, in BFS order.
pub fn reachable_free(terrain: &TerrainMap, start: Cell) -> Vec<Cell> {
    let shape = terrain.shape();
    if !shape.contains(start) || terrain.is_obstacle(start) {
        return Vec::new();
    }
    let mut seen = vec![false; shape.cells()];
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    seen[shape.index(start)] = true;
    while let Some(c) = queue.pop_front() {
        out.push(c);
        for a in Action::ALL {
            if let Some(next) = c.step(a, shape) {
                let i = shape.index(next);
                if !seen[i] && terrain.is_free(next) {
                    seen[i] = true;
                    queue.push_back(next);
                }
            }
        }
    }
    out
}

/// Whether sensing from every free cell reachable from `start` could reveal
/// at least `beta * n` cells, i.e. whether the completion branch is reachable.
pub fn is_solvable(terrain: &TerrainMap, start: Cell, d: u32, beta: f64) -> bool {
    let shape = terrain.shape();
    let n = shape.cells();
    let footprint = SensorFootprint::new(d, shape.cols);
    let mut seen = vec![false; n];
    let mut count = 0usize;
    for cell in reachable_free(terrain, start) {
        footprint.sweep(terrain, cell, |i| {
            if !seen[i] {
                seen[i] = true;
                count += 1;
            }
        });
        if coverage_reached(count, n, beta) {
            return true;
        }
    }
    coverage_reached(count, n, beta)
}
