//! Frontier-based exploration over discovered information only.
//!
//! Planners see a [`Belief`], which is built from an [`Observation`] and
//! therefore cannot reach the hidden terrain. Unknown cells are treated as
//! impassable.

use std::collections::VecDeque;

use crate::env::{Observation, OBSTACLE, UNKNOWN};
use crate::grid::{Action, Cell, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Knowledge {
    UnknownCell,
    KnownFree,
    KnownObstacle,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("no reachable frontier")]
    NoReachableFrontier,
    #[error("observation has no robot marker")]
    NoRobot,
}

/// What the agent knows: per-cell knowledge plus its own pose.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Belief {
    shape: Shape,
    known: Vec<Knowledge>,
    pose: Cell,
}

impl Belief {
    pub fn new(shape: Shape, known: Vec<Knowledge>, pose: Cell) -> Self {
        assert_eq!(known.len(), shape.cells(), "knowledge grid does not match shape");
        assert_eq!(known[shape.index(pose)], Knowledge::KnownFree, "pose must be known free");
        Self { shape, known, pose }
    }

    pub fn from_observation(obs: &Observation) -> Result<Self, PlanError> {
        let pose = obs.robot().ok_or(PlanError::NoRobot)?;
        let known = obs
            .values()
            .iter()
            .map(|v| match *v {
                UNKNOWN => Knowledge::UnknownCell,
                OBSTACLE => Knowledge::KnownObstacle,
                _ => Knowledge::KnownFree,
            })
            .collect();
        Ok(Self { shape: obs.shape(), known, pose })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn pose(&self) -> Cell {
        self.pose
    }

    #[inline]
    pub fn knowledge(&self, cell: Cell) -> Knowledge {
        self.known[self.shape.index(cell)]
    }

    #[inline]
    pub fn is_known_free(&self, cell: Cell) -> bool {
        self.knowledge(cell) == Knowledge::KnownFree
    }

    pub fn is_discovered(&self, cell: Cell) -> bool {
        self.knowledge(cell) != Knowledge::UnknownCell
    }

    fn is_frontier(&self, cell: Cell) -> bool {
        self.is_known_free(cell)
            && Action::ALL
                .iter()
                .filter_map(|a| cell.step(*a, self.shape))
                .any(|n| self.knowledge(n) == Knowledge::UnknownCell)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frontier {
    pub cell: Cell,
    pub path_cost: Option<usize>,
    pub info_gain: Option<usize>,
}

/// Known-free cells with at least one unknown 4-neighbour, row-major.
pub fn detect_frontiers(belief: &Belief) -> Vec<Frontier> {
    belief
        .shape
        .iter()
        .filter(|c| belief.is_frontier(*c))
        .map(|cell| Frontier { cell, path_cost: None, info_gain: None })
        .collect()
}

const UNREACHED: u32 = u32::MAX;

/// Breadth-first distances from one source over known-free cells.
///
/// Neighbours are expanded in N, E, S, W order, so the BFS tree encodes for
/// every cell the lexicographically smallest shortest action sequence.
struct SearchTree {
    shape: Shape,
    dist: Vec<u32>,
    parent: Vec<Option<(usize, Action)>>,
}

impl SearchTree {
    fn grow(belief: &Belief, from: Cell) -> Self {
        let shape = belief.shape;
        let mut dist = vec![UNREACHED; shape.cells()];
        let mut parent = vec![None; shape.cells()];
        let mut queue = VecDeque::new();
        dist[shape.index(from)] = 0;
        queue.push_back(from);
        while let Some(c) = queue.pop_front() {
            let ci = shape.index(c);
            for a in Action::ALL {
                let Some(next) = c.step(a, shape) else { continue };
                let ni = shape.index(next);
                if dist[ni] == UNREACHED && belief.known[ni] == Knowledge::KnownFree {
                    dist[ni] = dist[ci] + 1;
                    parent[ni] = Some((ci, a));
                    queue.push_back(next);
                }
            }
        }
        Self { shape, dist, parent }
    }

    fn distance(&self, cell: Cell) -> Option<usize> {
        match self.dist[self.shape.index(cell)] {
            UNREACHED => None,
            d => Some(d as usize),
        }
    }

    fn path_to(&self, cell: Cell) -> Option<Vec<Action>> {
        self.distance(cell)?;
        let mut actions = Vec::new();
        let mut at = self.shape.index(cell);
        while let Some((prev, a)) = self.parent[at] {
            actions.push(a);
            at = prev;
        }
        actions.reverse();
        Some(actions)
    }

    fn first_action(&self, cell: Cell) -> Option<Action> {
        let mut at = self.shape.index(cell);
        let mut first = None;
        while let Some((prev, a)) = self.parent[at] {
            first = Some(a);
            at = prev;
        }
        first
    }
}

/// Minimum-length 4-connected path over known-free cells; among equal-length
/// paths the one whose action sequence is smallest in (N, E, S, W) order.
/// `None` when `to` is unreachable.
pub fn shortest_path(belief: &Belief, from: Cell, to: Cell) -> Option<Vec<Action>> {
    SearchTree::grow(belief, from).path_to(to)
}

/// Frontiers reachable from the pose, with `path_cost` filled in.
pub fn reachable_frontiers(belief: &Belief) -> Vec<Frontier> {
    let tree = SearchTree::grow(belief, belief.pose);
    reachable_with(belief, &tree)
}

fn reachable_with(belief: &Belief, tree: &SearchTree) -> Vec<Frontier> {
    detect_frontiers(belief)
        .into_iter()
        .filter_map(|f| tree.distance(f.cell).map(|d| Frontier { path_cost: Some(d), ..f }))
        .collect()
}

/// Unknown cells within Euclidean distance `d` of `cell`, ignoring occlusion.
pub fn info_gain(belief: &Belief, cell: Cell, d: u32) -> usize {
    let shape = belief.shape;
    let r = d as usize;
    let d2 = (d as u64).pow(2);
    let rows = cell.row.saturating_sub(r)..(cell.row + r + 1).min(shape.rows);
    rows.flat_map(|row| {
        let cols = cell.col.saturating_sub(r)..(cell.col + r + 1).min(shape.cols);
        cols.map(move |col| Cell::new(row, col))
    })
    .filter(|q| q.dist_sq(cell) <= d2 && belief.knowledge(*q) == Knowledge::UnknownCell)
    .count()
}

fn step_towards(tree: &SearchTree, belief: &Belief, target: Cell) -> Action {
    match tree.first_action(target) {
        Some(a) => a,
        // The pose itself is a frontier: step into an unknown neighbour. With
        // d >= 1 this cannot happen since every neighbour is sensed.
        None => Action::ALL
            .into_iter()
            .find(|a| belief.pose.step(*a, belief.shape).is_some_and(|n| belief.knowledge(n) == Knowledge::UnknownCell))
            .expect("frontier pose has an unknown neighbour"),
    }
}

/// Cost-based policy: head for the nearest reachable frontier, ties broken
/// by row-major order of the frontier cell.
pub fn cost_policy_next(belief: &Belief) -> Result<Action, PlanError> {
    let tree = SearchTree::grow(belief, belief.pose);
    let target = reachable_with(belief, &tree)
        .into_iter()
        .min_by_key(|f| (f.path_cost, f.cell))
        .ok_or(PlanError::NoReachableFrontier)?;
    Ok(step_towards(&tree, belief, target.cell))
}

/// Scores every reachable frontier and returns them with cost and gain filled.
pub fn score_frontiers(belief: &Belief, d: u32) -> Vec<Frontier> {
    reachable_frontiers(belief)
        .into_iter()
        .map(|f| Frontier { info_gain: Some(info_gain(belief, f.cell, d)), ..f })
        .collect()
}

/// Picks the frontier maximising `gain / (1 + cost)`; ties go to the
/// row-major-first cell. Ratios are compared exactly by cross-multiplication.
pub fn best_utility(frontiers: &[Frontier]) -> Option<Frontier> {
    let key = |f: &Frontier| (f.info_gain.unwrap_or(0) as u128, 1 + f.path_cost.unwrap_or(0) as u128);
    let mut best: Option<Frontier> = None;
    for f in frontiers {
        best = match best {
            None => Some(*f),
            Some(b) => {
                let ((g1, c1), (g2, c2)) = (key(f), key(&b));
                let better = g1 * c2 > g2 * c1 || (g1 * c2 == g2 * c1 && f.cell < b.cell);
                Some(if better { *f } else { b })
            }
        };
    }
    best
}

/// Utility-based policy over the information field recomputed every call.
pub fn utility_policy_next(belief: &Belief, d: u32) -> Result<Action, PlanError> {
    let tree = SearchTree::grow(belief, belief.pose);
    let scored: Vec<Frontier> = reachable_with(belief, &tree)
        .into_iter()
        .map(|f| Frontier { info_gain: Some(info_gain(belief, f.cell, d)), ..f })
        .collect();
    let target = best_utility(&scored).ok_or(PlanError::NoReachableFrontier)?;
    Ok(step_towards(&tree, belief, target.cell))
}
