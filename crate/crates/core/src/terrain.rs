//! Ground-truth terrain and its plain-text interchange format.
//!
//! The text format is a header line `rows cols` followed by one line per row
//! made of `.` (free) and `#` (obstacle), each line terminated by `\n`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::grid::{Cell, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CellKind {
    Free = 0,
    Obstacle = 1,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TerrainMap {
    shape: Shape,
    cells: Vec<CellKind>,
}

impl TerrainMap {
    pub fn empty(shape: Shape) -> Self {
        Self { shape, cells: vec![CellKind::Free; shape.cells()] }
    }

    pub fn with_obstacles(shape: Shape, obstacles: impl IntoIterator<Item = Cell>) -> Self {
        let mut map = Self::empty(shape);
        for c in obstacles {
            map.set(c, CellKind::Obstacle);
        }
        map
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    #[inline]
    pub fn kind(&self, cell: Cell) -> CellKind {
        self.cells[self.shape.index(cell)]
    }

    #[inline]
    pub fn kind_at(&self, index: usize) -> CellKind {
        self.cells[index]
    }

    #[inline]
    pub fn is_obstacle(&self, cell: Cell) -> bool {
        self.kind(cell) == CellKind::Obstacle
    }

    #[inline]
    pub fn is_free(&self, cell: Cell) -> bool {
        self.kind(cell) == CellKind::Free
    }

    pub fn set(&mut self, cell: Cell, kind: CellKind) {
        let i = self.shape.index(cell);
        self.cells[i] = kind;
    }

    pub fn obstacle_count(&self) -> usize {
        self.cells.iter().filter(|k| **k == CellKind::Obstacle).count()
    }

    pub fn obstacles(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells.iter().enumerate().filter(|(_, k)| **k == CellKind::Obstacle).map(|(i, _)| self.shape.cell(i))
    }

    pub(crate) fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    fn row_strings(&self) -> Vec<String> {
        self.cells
            .chunks(self.shape.cols)
            .map(|row| {
                row.iter()
                    .map(|k| match k {
                        CellKind::Free => '.',
                        CellKind::Obstacle => '#',
                    })
                    .collect()
            })
            .collect()
    }

    fn from_row_strings<S: AsRef<str>>(shape: Shape, rows: &[S]) -> Result<Self, TerrainParseError> {
        if rows.len() != shape.rows {
            return Err(TerrainParseError::RowCount { expected: shape.rows, found: rows.len() });
        }
        let mut cells = Vec::with_capacity(shape.cells());
        for (r, line) in rows.iter().enumerate() {
            let line = line.as_ref();
            if line.len() != shape.cols {
                return Err(TerrainParseError::RowWidth { row: r, expected: shape.cols, found: line.len() });
            }
            for (c, ch) in line.chars().enumerate() {
                cells.push(match ch {
                    '.' => CellKind::Free,
                    '#' => CellKind::Obstacle,
                    other => return Err(TerrainParseError::BadChar { row: r, col: c, ch: other }),
                });
            }
        }
        Ok(Self { shape, cells })
    }

    /// Renders the canonical text form.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.shape.rows, self.shape.cols);
        for row in self.row_strings() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }

    /// Parses the text form. Accepts an optional trailing newline on the last
    /// row and `\r\n` line endings; everything else must match exactly.
    pub fn from_text(text: &str) -> Result<Self, TerrainParseError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(TerrainParseError::MissingHeader)?;
        let mut dims = header.split_whitespace().map(str::parse::<usize>);
        let (rows, cols) = match (dims.next(), dims.next(), dims.next()) {
            (Some(Ok(r)), Some(Ok(c)), None) if r > 0 && c > 0 => (r, c),
            _ => return Err(TerrainParseError::BadHeader(header.to_string())),
        };
        let body: Vec<&str> = lines.collect();
        Self::from_row_strings(Shape::new(rows, cols), &body)
    }
}

impl fmt::Debug for TerrainMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TerrainMap {}\n{}", self.shape, self.row_strings().join("\n"))
    }
}

impl fmt::Display for TerrainMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for TerrainMap {
    type Err = TerrainParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_text(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TerrainParseError {
    #[error("terrain text is empty")]
    MissingHeader,
    #[error("bad terrain header `{0}` (expected `rows cols`)")]
    BadHeader(String),
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("row {row}: expected {expected} columns, found {found}")]
    RowWidth { row: usize, expected: usize, found: usize },
    #[error("row {row}, col {col}: unexpected character {ch:?}")]
    BadChar { row: usize, col: usize, ch: char },
}

// Serialized inline in traces as {"rows", "cols", "grid": ["..#", ...]}.
#[derive(Serialize, Deserialize)]
struct TerrainRepr {
    rows: usize,
    cols: usize,
    grid: Vec<String>,
}

impl Serialize for TerrainMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TerrainRepr { rows: self.shape.rows, cols: self.shape.cols, grid: self.row_strings() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TerrainMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = TerrainRepr::deserialize(deserializer)?;
        TerrainMap::from_row_strings(Shape::new(repr.rows, repr.cols), &repr.grid).map_err(serde::de::Error::custom)
    }
}
