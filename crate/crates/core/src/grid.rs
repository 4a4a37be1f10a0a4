//! Grid primitives shared by every module: cell coordinates, grid shapes and
//! the four-way move set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// A cell coordinate, 0-based, row-major (row 0 is the northern edge).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Squared Euclidean distance between cell centres.
    pub fn dist_sq(self, other: Cell) -> u64 {
        let dr = self.row.abs_diff(other.row) as u64;
        let dc = self.col.abs_diff(other.col) as u64;
        dr * dr + dc * dc
    }

    /// Applies a signed offset, returning `None` when the result leaves `shape`.
    pub fn offset(self, dr: isize, dc: isize, shape: Shape) -> Option<Cell> {
        let row = self.row.checked_add_signed(dr)?;
        let col = self.col.checked_add_signed(dc)?;
        shape.contains_rc(row, col).then_some(Cell { row, col })
    }

    pub fn step(self, action: Action, shape: Shape) -> Option<Cell> {
        let (dr, dc) = action.delta();
        self.offset(dr, dc, shape)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Grid dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

impl Shape {
    pub const fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub const fn square(side: usize) -> Self {
        Self { rows: side, cols: side }
    }

    /// Number of cells `n`.
    pub const fn cells(self) -> usize {
        self.rows * self.cols
    }

    pub const fn contains(self, cell: Cell) -> bool {
        cell.row < self.rows && cell.col < self.cols
    }

    const fn contains_rc(self, row: usize, col: usize) -> bool {
        row < self.rows && col < self.cols
    }

    #[inline]
    pub const fn index(self, cell: Cell) -> usize {
        cell.row * self.cols + cell.col
    }

    #[inline]
    pub const fn cell(self, index: usize) -> Cell {
        Cell { row: index / self.cols, col: index % self.cols }
    }

    /// All cells in row-major order.
    pub fn iter(self) -> impl Iterator<Item = Cell> {
        (0..self.cells()).map(move |i| self.cell(i))
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// One of the four von Neumann moves.
///
/// The discriminant order (N, E, S, W) is the index order used on the wire and
/// the tie-break order used by the planners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "N")]
    North,
    #[serde(rename = "E")]
    East,
    #[serde(rename = "S")]
    South,
    #[serde(rename = "W")]
    West,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::North, Action::East, Action::South, Action::West];

    /// (row, col) delta. North decreases the row index.
    pub const fn delta(self) -> (isize, isize) {
        match self {
            Action::North => (-1, 0),
            Action::East => (0, 1),
            Action::South => (1, 0),
            Action::West => (0, -1),
        }
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Action> {
        Self::ALL.get(index).copied()
    }

    pub const fn letter(self) -> char {
        match self {
            Action::North => 'N',
            Action::East => 'E',
            Action::South => 'S',
            Action::West => 'W',
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognised action `{0}` (expected N, E, S or W)")]
pub struct ParseActionError(pub String);

impl FromStr for Action {
    type Err = ParseActionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "N" | "NORTH" | "UP" => Ok(Action::North),
            "E" | "EAST" | "RIGHT" => Ok(Action::East),
            "S" | "SOUTH" | "DOWN" => Ok(Action::South),
            "W" | "WEST" | "LEFT" => Ok(Action::West),
            _ => Err(ParseActionError(s.to_string())),
        }
    }
}

/// Parses a whitespace- or comma-separated action list such as `"N E E S"`.
pub fn parse_actions(text: &str) -> Result<Vec<Action>, ParseActionError> {
    text.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(str::parse).collect()
}
