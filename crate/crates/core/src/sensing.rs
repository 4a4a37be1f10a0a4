//! Range-limited, line-of-sight-occluded sensing.
//!
//! Cells are closed unit squares centred on their integer coordinates. A ray
//! joins two cell centres and touches every square it intersects (supercover),
//! including all four squares around any lattice corner it passes through.
//! A target is visible when it lies within Euclidean distance `d` of the pose
//! and no cell strictly between the two endpoints is an obstacle.

use crate::grid::{Cell, Shape};
use crate::terrain::TerrainMap;

/// Walks the supercover of the segment between the centres of `(r0, c0)` and
/// `(r1, c1)`, calling `visit` on each cell in order from start to end.
///
/// At a corner crossing the column-side cell is reported before the row-side
/// cell, which keeps the walk exactly reversible.
fn supercover(r0: isize, c0: isize, r1: isize, c1: isize, mut visit: impl FnMut(isize, isize)) {
    let (dr, dc) = (r1 - r0, c1 - c0);
    let (ny, nx) = (dr.unsigned_abs() as i64, dc.unsigned_abs() as i64);
    let (sy, sx) = (dr.signum(), dc.signum());
    let (mut r, mut c) = (r0, c0);
    let (mut iy, mut ix) = (0i64, 0i64);
    visit(r, c);
    while ix < nx || iy < ny {
        // Compare the parameters of the next vertical-edge crossing,
        // (0.5 + ix) / nx, and the next horizontal-edge crossing, (0.5 + iy) / ny.
        let tx = (1 + 2 * ix) * ny;
        let ty = (1 + 2 * iy) * nx;
        if tx < ty {
            c += sx;
            ix += 1;
            visit(r, c);
        } else if tx > ty {
            r += sy;
            iy += 1;
            visit(r, c);
        } else {
            visit(r, c + sx);
            visit(r + sy, c);
            r += sy;
            c += sx;
            ix += 1;
            iy += 1;
            visit(r, c);
        }
    }
}

/// Supercover cells from `a` to `q`, both endpoints included.
pub fn traverse_ray(a: Cell, q: Cell) -> Vec<Cell> {
    let mut out = Vec::new();
    supercover(a.row as isize, a.col as isize, q.row as isize, q.col as isize, |r, c| {
        out.push(Cell::new(r as usize, c as usize))
    });
    out
}

/// True iff no cell strictly between `a` and `q` on the ray is an obstacle.
/// Obstacles at either endpoint do not block.
pub fn line_of_sight(terrain: &TerrainMap, a: Cell, q: Cell) -> bool {
    let ray = traverse_ray(a, q);
    match ray.len() {
        0..=2 => true,
        len => ray[1..len - 1].iter().all(|c| terrain.is_free(*c)),
    }
}

/// Cells sensed from one pose, sorted row-major.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VisibleSet {
    cells: Vec<Cell>,
}

impl VisibleSet {
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    pub fn is_subset(&self, other: &VisibleSet) -> bool {
        self.cells.iter().all(|c| other.contains(*c))
    }
}

impl FromIterator<Cell> for VisibleSet {
    fn from_iter<I: IntoIterator<Item = Cell>>(iter: I) -> Self {
        let mut cells: Vec<Cell> = iter.into_iter().collect();
        cells.sort_unstable();
        cells.dedup();
        Self { cells }
    }
}

#[derive(Clone, Debug)]
struct Ray {
    dr: isize,
    dc: isize,
    /// Linear index offset of the target for the grid width the footprint was built for.
    target: isize,
    between: std::ops::Range<usize>,
}

/// The sensing disk of one radius, with every ray's intermediate cells
/// precomputed as linear index offsets for a fixed grid width.
///
/// Rays are translation invariant, so one footprint serves every pose of every
/// grid with the same column count. Intermediate cells of a ray between two
/// in-grid cells are themselves in-grid, so only the target needs a bounds check.
#[derive(Clone, Debug)]
pub struct SensorFootprint {
    radius: u32,
    cols: usize,
    rays: Vec<Ray>,
    between: Vec<isize>,
}

impl SensorFootprint {
    pub fn new(radius: u32, cols: usize) -> Self {
        let d = radius as isize;
        let cols_i = cols as isize;
        let mut rays = Vec::new();
        let mut between = Vec::new();
        let mut offsets: Vec<(isize, isize)> = (-d..=d)
            .flat_map(|dr| (-d..=d).map(move |dc| (dr, dc)))
            .filter(|(dr, dc)| (dr * dr + dc * dc) as u64 <= (radius as u64).pow(2))
            .collect();
        // Nearest first so the pose is always the first ray.
        offsets.sort_by_key(|&(dr, dc)| (dr * dr + dc * dc, dr, dc));
        for (dr, dc) in offsets {
            let start = between.len();
            let mut path = Vec::new();
            supercover(0, 0, dr, dc, |r, c| path.push((r, c)));
            if path.len() > 2 {
                between.extend(path[1..path.len() - 1].iter().map(|&(r, c)| r * cols_i + c));
            }
            rays.push(Ray { dr, dc, target: dr * cols_i + dc, between: start..between.len() });
        }
        Self { radius, cols, rays, between }
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Number of lattice cells in the disk.
    pub fn disk_len(&self) -> usize {
        self.rays.len()
    }

    /// Disk offsets `(dr, dc)`, nearest first.
    pub fn offsets(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        self.rays.iter().map(|r| (r.dr, r.dc))
    }

    /// Calls `visit` with the linear index of every visible cell.
    #[inline]
    pub fn sweep(&self, terrain: &TerrainMap, pose: Cell, mut visit: impl FnMut(usize)) {
        let shape = terrain.shape();
        debug_assert_eq!(shape.cols, self.cols, "footprint built for a different grid width");
        let cells = terrain.cells();
        let base = shape.index(pose) as isize;
        let (pr, pc) = (pose.row as isize, pose.col as isize);
        let (rows, cols) = (shape.rows as isize, shape.cols as isize);
        for ray in &self.rays {
            let (r, c) = (pr + ray.dr, pc + ray.dc);
            if r < 0 || c < 0 || r >= rows || c >= cols {
                continue;
            }
            let blocked = self.between[ray.between.clone()]
                .iter()
                .any(|off| cells[(base + off) as usize] == crate::terrain::CellKind::Obstacle);
            if !blocked {
                visit((base + ray.target) as usize);
            }
        }
    }
}

/// Every cell within Euclidean distance `d` of `pose` that has line of sight to it.
pub fn sensor_sweep(terrain: &TerrainMap, pose: Cell, d: u32) -> VisibleSet {
    let shape: Shape = terrain.shape();
    let footprint = SensorFootprint::new(d, shape.cols);
    let mut cells = Vec::with_capacity(footprint.disk_len());
    footprint.sweep(terrain, pose, |i| cells.push(shape.cell(i)));
    cells.into_iter().collect()
}
