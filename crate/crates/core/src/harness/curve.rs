use serde::{Deserialize, Serialize};

use super::{replay, EpisodeTrace, HarnessError, Stat};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Cumulative valid moves.
    pub distance: usize,
    pub coverage: f64,
}

/// Coverage as a function of distance travelled for one episode: the point
/// after reset, then one point per valid move.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeCurve {
    pub points: Vec<CurvePoint>,
}

impl EpisodeCurve {
    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1].distance > w[0].distance && w[1].coverage >= w[0].coverage)
    }

    /// First distance at which coverage reaches `level`.
    pub fn distance_to_reach(&self, level: f64) -> Option<usize> {
        self.points.iter().find(|p| p.coverage >= level).map(|p| p.distance)
    }

    /// Moves per coverage point over the last five points before `beta`,
    /// divided by moves per point between 25% and 75%. Values above one mean
    /// the end stage is slower than the middle.
    pub fn end_stage_slowdown(&self, beta: f64) -> Option<f64> {
        let d = |x: f64| self.distance_to_reach(x).map(|v| v as f64);
        let end = (d(beta)? - d(beta - 0.05)?) / 5.0;
        let mid = (d(0.75)? - d(0.25)?) / 50.0;
        if mid <= 0.0 {
            return None;
        }
        Some(end / mid)
    }

    /// Coverage after travelling `distance`; holds the final value past the end.
    pub fn coverage_at(&self, distance: usize) -> f64 {
        let k = self.points.partition_point(|p| p.distance <= distance);
        self.points[k.saturating_sub(1)].coverage
    }
}

pub fn episode_curve(trace: &EpisodeTrace) -> Result<EpisodeCurve, HarnessError> {
    let r = replay(trace)?;
    let mut points = vec![CurvePoint { distance: 0, coverage: r.coverage[0] }];
    for (&distance, &coverage) in r.distance.iter().zip(&r.coverage).skip(1) {
        if distance > points[points.len() - 1].distance {
            points.push(CurvePoint { distance, coverage });
        }
    }
    Ok(EpisodeCurve { points })
}

/// Mean and population std of coverage across episodes at every integer
/// distance up to the longest episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageCurve {
    pub distance: Vec<usize>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub episodes: usize,
    /// Distance unit; always `"cells"`.
    pub units: String,
}

pub fn aggregate_curves(curves: &[EpisodeCurve]) -> CoverageCurve {
    let max = curves.iter().filter_map(|c| c.points.last()).map(|p| p.distance).max().unwrap_or(0);
    let mut out = CoverageCurve {
        distance: Vec::with_capacity(max + 1),
        mean: Vec::with_capacity(max + 1),
        std: Vec::with_capacity(max + 1),
        episodes: curves.len(),
        units: "cells".into(),
    };
    if curves.is_empty() {
        return out;
    }
    for d in 0..=max {
        let s = Stat::of(curves.iter().map(|c| c.coverage_at(d)));
        out.distance.push(d);
        out.mean.push(s.mean);
        out.std.push(s.std);
    }
    out
}
