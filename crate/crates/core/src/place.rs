//! Room/corridor categorization from door connectivity and compactness.
//!
//! A segment's corridor confidence is `p_d * (1 - p_s)`: `p_d` is its door
//! count over the largest door count of any segment, `p_s` its normalized
//! spin index (1 for a disk, small for long thin shapes).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::CellSet;
use crate::error::{Error, Result};
use crate::segmentation::SegmentLabelMap;

pub const SCORE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaceClass {
    Room,
    Corridor,
    Door,
}

impl PlaceClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PlaceClass::Room => "room",
            PlaceClass::Corridor => "corridor",
            PlaceClass::Door => "door",
        }
    }
}

/// How distances from the centroid enter the spin index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinMode {
    /// Mean squared distance; a disk of radius r scores r^2 / 2.
    Squared,
    /// Mean distance; a disk of radius r scores 2r / 3.
    Unsquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlaceParams {
    /// `p_comb` at or above this is always a corridor.
    pub corridor_threshold: f64,
    /// The single best segment is a corridor if it reaches this.
    pub fallback_threshold: f64,
    pub spin: SpinMode,
}

impl Default for PlaceParams {
    fn default() -> Self {
        PlaceParams {
            corridor_threshold: 0.5,
            fallback_threshold: 0.2,
            spin: SpinMode::Squared,
        }
    }
}

/// Door counts and their normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct DoorScores {
    /// `n_d` per segment, indexed by `id - 1`.
    pub counts: Vec<usize>,
    /// `p_d` per segment; `None` when no segment has a door.
    pub normalized: Option<Vec<f64>>,
}

/// Door count per segment from door-to-segment pairs, normalized by the
/// maximum count.
pub fn compute_pd(pairs: &[[u32; 2]], segment_count: u32) -> Result<DoorScores> {
    let mut counts = vec![0usize; segment_count as usize];
    for (door, pair) in pairs.iter().enumerate() {
        for id in pair {
            if *id == 0 || *id > segment_count {
                return Err(Error::MissingSegment {
                    door,
                    segment: *id,
                });
            }
            counts[*id as usize - 1] += 1;
        }
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    let normalized = (max > 0).then(|| counts.iter().map(|n| *n as f64 / max as f64).collect());
    Ok(DoorScores { counts, normalized })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spin {
    /// Spin index of the segment, in cells^2 (squared) or cells.
    pub s: f64,
    /// Spin index of the disk with the same area.
    pub s_eac: f64,
    /// `min(1, s_eac / s)`.
    pub p_s: f64,
}

/// Spin index of a cell set around its centroid.
pub fn compute_spin(cells: &CellSet, mode: SpinMode) -> Result<Spin> {
    let (cy, cx) = cells.centroid().ok_or(Error::EmptyCells)?;
    let n = cells.len() as f64;
    let s = cells
        .iter()
        .map(|c| {
            let d2 = (c.row as f64 - cy).powi(2) + (c.col as f64 - cx).powi(2);
            match mode {
                SpinMode::Squared => d2,
                SpinMode::Unsquared => d2.sqrt(),
            }
        })
        .sum::<f64>()
        / n;
    let r_eac = (n / PI).sqrt();
    let s_eac = match mode {
        SpinMode::Squared => 0.5 * r_eac * r_eac,
        SpinMode::Unsquared => 2.0 / 3.0 * r_eac,
    };
    // a single cell is as compact as it gets
    let p_s = if s <= 0.0 { 1.0 } else { (s_eac / s).min(1.0) };
    Ok(Spin { s, s_eac, p_s })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityScore {
    pub segment: u32,
    pub cells: usize,
    pub n_d: usize,
    pub p_d: f64,
    pub s: f64,
    pub s_eac: f64,
    pub p_s: f64,
    pub p_comb: f64,
    pub label: PlaceClass,
    /// `p_comb` falls between the fallback and corridor thresholds.
    pub uncertain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub version: u32,
    /// No doors at all: `p_d` is undefined and every segment is a room.
    pub doorless: bool,
    /// Segments sharing the maximum `p_comb`, when more than one does.
    pub ties: Vec<u32>,
    pub scores: Vec<EntityScore>,
}

impl ScoreTable {
    pub fn label(&self, segment: u32) -> Option<PlaceClass> {
        self.scores
            .iter()
            .find(|s| s.segment == segment)
            .map(|s| s.label)
    }

    /// Segment with the strict maximum `p_comb`, if there is one.
    pub fn best(&self) -> Option<u32> {
        if !self.ties.is_empty() {
            return None;
        }
        self.scores
            .iter()
            .max_by(|a, b| a.p_comb.total_cmp(&b.p_comb))
            .filter(|s| s.p_comb > 0.0)
            .map(|s| s.segment)
    }
}

/// Fill in `p_comb`, labels, uncertainty and ties.
pub fn combine_and_label(mut scores: Vec<EntityScore>, params: &PlaceParams) -> ScoreTable {
    for s in scores.iter_mut() {
        s.p_comb = s.p_d * (1.0 - s.p_s);
    }
    let max = scores.iter().map(|s| s.p_comb).fold(0.0f64, f64::max);
    let at_max: Vec<u32> = scores
        .iter()
        .filter(|s| s.p_comb == max)
        .map(|s| s.segment)
        .collect();
    let strict = (at_max.len() == 1).then(|| at_max[0]);
    for s in scores.iter_mut() {
        let fallback = strict == Some(s.segment) && s.p_comb >= params.fallback_threshold;
        s.label = if s.p_comb >= params.corridor_threshold || fallback {
            PlaceClass::Corridor
        } else {
            PlaceClass::Room
        };
        s.uncertain =
            s.p_comb >= params.fallback_threshold && s.p_comb < params.corridor_threshold;
    }
    let doorless = scores.iter().all(|s| s.n_d == 0);
    ScoreTable {
        version: SCORE_FORMAT_VERSION,
        doorless,
        ties: if at_max.len() > 1 && max > 0.0 { at_max } else { Vec::new() },
        scores,
    }
}

/// Score and label every segment of `labels`.
pub fn categorize(
    labels: &SegmentLabelMap,
    pairs: &[[u32; 2]],
    params: &PlaceParams,
) -> Result<ScoreTable> {
    let doors = compute_pd(pairs, labels.count())?;
    let segments = labels.segment_cells();
    let spins: Vec<Spin> = segments
        .par_iter()
        .map(|cells| compute_spin(cells, params.spin))
        .collect::<Result<_>>()?;
    let scores = spins
        .into_iter()
        .enumerate()
        .map(|(i, spin)| EntityScore {
            segment: i as u32 + 1,
            cells: segments[i].len(),
            n_d: doors.counts[i],
            p_d: doors.normalized.as_ref().map_or(0.0, |p| p[i]),
            s: spin.s,
            s_eac: spin.s_eac,
            p_s: spin.p_s,
            p_comb: 0.0,
            label: PlaceClass::Room,
            uncertain: false,
        })
        .collect();
    Ok(combine_and_label(scores, params))
}
