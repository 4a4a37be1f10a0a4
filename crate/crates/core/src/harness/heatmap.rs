use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{replay, EpisodeTrace, HarnessError};
use crate::grid::Shape;

/// Per-cell visit counts and discovered-obstacle counts summed over episodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    pub shape: Shape,
    /// Number of `(trace, t)` pairs with the robot at each cell, `t` running
    /// over the start and every step.
    pub visitation: Vec<u64>,
    /// Episodes in which each obstacle cell had been discovered by the end.
    pub obstacle_hits: Vec<u64>,
    pub episodes: usize,
}

impl Heatmap {
    pub fn new(shape: Shape) -> Self {
        Self { shape, visitation: vec![0; shape.cells()], obstacle_hits: vec![0; shape.cells()], episodes: 0 }
    }

    fn grid(&self, v: &[u64]) -> Vec<Vec<u64>> {
        v.chunks(self.shape.cols).map(<[u64]>::to_vec).collect()
    }
}

impl Serialize for Heatmap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Heatmap", 5)?;
        st.serialize_field("rows", &self.shape.rows)?;
        st.serialize_field("cols", &self.shape.cols)?;
        st.serialize_field("episodes", &self.episodes)?;
        st.serialize_field("visitation", &self.grid(&self.visitation))?;
        st.serialize_field("obstacle_hits", &self.grid(&self.obstacle_hits))?;
        st.end()
    }
}

pub fn accumulate_heatmap(traces: &[EpisodeTrace]) -> Result<Heatmap, HarnessError> {
    let Some(first) = traces.first() else {
        return Err(HarnessError::InvalidArgument("no traces to accumulate".into()));
    };
    let shape = first.config.shape;
    let mut map = Heatmap::new(shape);
    for t in traces {
        if t.config.shape != shape {
            return Err(HarnessError::ShapeMismatch { expected: shape, found: t.config.shape });
        }
        let r = replay(t)?;
        for &p in &r.poses {
            map.visitation[shape.index(p)] += 1;
        }
        for cell in r.env.terrain().obstacles() {
            if r.env.mask().is_discovered(cell) {
                map.obstacle_hits[shape.index(cell)] += 1;
            }
        }
        map.episodes += 1;
    }
    Ok(map)
}
