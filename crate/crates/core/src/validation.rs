//! Door validation by repeated free-space segmentation.
//!
//! All hypotheses are closed to get the baseline count K0. Each hypothesis
//! is then opened on its own: a real door joins exactly two segments, so the
//! count drops to K0 - 1. Anything else is rejected, or flagged ambiguous
//! when one opening joins more than two segments.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::Cell;
use crate::cluster::{DoorHypothesis, HypothesisState};
use crate::error::{Error, Result};
use crate::grid::BinaryGrid;
use crate::segmentation::{close_doors_sealed, segment, SegmentLabelMap, SegmentParams};

pub const VALIDATION_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationParams {
    pub segment: SegmentParams,
    /// Closed doors are grown by this many cells (Chebyshev) so that thin
    /// slivers beside a rotated door cannot connect its two sides.
    pub seal_margin: usize,
}

impl Default for ValidationParams {
    fn default() -> Self {
        ValidationParams {
            segment: SegmentParams::default(),
            seal_margin: 1,
        }
    }
}

/// Outcome for one hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisVerdict {
    pub id: usize,
    pub state: HypothesisState,
    /// Segment count with only this hypothesis open.
    pub k_open: u32,
    /// Ids (in the all-closed labelling) of the segments joined by opening it.
    pub merged: Vec<u32>,
    /// Final segment ids this door links.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linked: Option<[u32; 2]>,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub version: u32,
    pub k0: u32,
    /// Segment count of the final labelling.
    pub k_final: u32,
    pub valid: usize,
    pub rejected: usize,
    pub ambiguous: usize,
    pub hypotheses: Vec<HypothesisVerdict>,
}

#[derive(Debug, Clone)]
pub struct Validation {
    /// Input hypotheses with `state`, `linked` and `ambiguous` filled in.
    pub hypotheses: Vec<DoorHypothesis>,
    /// Free space with valid doors closed and rejected ones reverted.
    pub labels: SegmentLabelMap,
    pub report: ValidationReport,
}

impl Validation {
    pub fn valid(&self) -> impl Iterator<Item = &DoorHypothesis> {
        self.hypotheses
            .iter()
            .filter(|h| h.state == HypothesisState::Valid)
    }
}

/// First cell of every segment, indexed by `id - 1`.
fn representatives(labels: &SegmentLabelMap) -> Vec<Cell> {
    let w = labels.width();
    let mut reps = vec![None; labels.count() as usize];
    for (i, l) in labels.labels().iter().enumerate() {
        if *l > 0 && reps[*l as usize - 1].is_none() {
            reps[*l as usize - 1] = Some(Cell::new(i / w, i % w));
        }
    }
    reps.into_iter().map(|c| c.expect("labels are dense")).collect()
}

/// Segments of `base` that end up sharing one segment of `opened` with at
/// least one other segment. Opening cells only ever merges segments, so
/// every base segment lies inside a single opened segment.
fn merged_groups(base: &SegmentLabelMap, reps: &[Cell], opened: &SegmentLabelMap) -> Vec<Vec<u32>> {
    let mut by_target: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (i, cell) in reps.iter().enumerate() {
        by_target
            .entry(opened.label(*cell))
            .or_default()
            .push(i as u32 + 1);
    }
    debug_assert_eq!(base.count() as usize, reps.len());
    by_target
        .into_iter()
        .filter(|(t, g)| *t > 0 && g.len() > 1)
        .map(|(_, g)| g)
        .collect()
}

fn check_bounds(b: &BinaryGrid, hyps: &[DoorHypothesis]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for h in hyps {
        if !seen.insert(h.id) {
            return Err(Error::Hypotheses(format!("duplicate hypothesis id {}", h.id)));
        }
        if let Some(bad) = h.cells.iter().find(|c| !b.contains(*c)) {
            return Err(Error::Hypotheses(format!(
                "hypothesis {} has cell ({}, {}) outside the {}x{} grid",
                h.id,
                bad.row,
                bad.col,
                b.width(),
                b.height()
            )));
        }
    }
    Ok(())
}

/// Validate every hypothesis in isolation against the all-closed grid.
pub fn validate(
    b: &BinaryGrid,
    hyps: &[DoorHypothesis],
    params: &ValidationParams,
) -> Result<Validation> {
    check_bounds(b, hyps)?;
    let margin = params.seal_margin;
    let all_closed = close_doors_sealed(b, hyps, &BTreeSet::new(), margin)?;
    let base = segment(&all_closed, &params.segment);
    let k0 = base.count();
    let reps = representatives(&base);
    let sizes = base.sizes();

    let tests: Vec<(u32, Vec<u32>)> = hyps
        .par_iter()
        .map(|h| -> Result<(u32, Vec<u32>)> {
            let open = BTreeSet::from([h.id]);
            let grid = close_doors_sealed(b, hyps, &open, margin)?;
            let opened = segment(&grid, &params.segment);
            // only the group containing this door can have merged
            let mut merged: Vec<u32> = merged_groups(&base, &reps, &opened)
                .into_iter()
                .flatten()
                .collect();
            merged.sort_unstable();
            Ok((opened.count(), merged))
        })
        .collect::<Result<_>>()?;

    let mut out: Vec<DoorHypothesis> = hyps.to_vec();
    for (h, (k_open, merged)) in out.iter_mut().zip(&tests) {
        h.linked = None;
        h.ambiguous = false;
        h.state = if *k_open + 1 == k0 && merged.len() == 2 {
            HypothesisState::Valid
        } else if *k_open + 1 < k0 && merged.len() > 2 {
            h.ambiguous = true;
            HypothesisState::Valid
        } else {
            HypothesisState::Rejected
        };
    }

    let valid: Vec<DoorHypothesis> = out
        .iter()
        .filter(|h| h.state == HypothesisState::Valid)
        .cloned()
        .collect();
    let final_grid = close_doors_sealed(b, &valid, &BTreeSet::new(), margin)?;
    let labels = segment(&final_grid, &params.segment);

    let mut verdicts = Vec::with_capacity(out.len());
    for (h, (k_open, merged)) in out.iter_mut().zip(tests) {
        if h.state == HypothesisState::Valid {
            // the two largest joined segments, mapped to final ids
            let mut by_size = merged.clone();
            by_size.sort_by_key(|id| (std::cmp::Reverse(sizes[*id as usize]), *id));
            let mut distinct: Vec<u32> = Vec::new();
            for id in by_size.iter().map(|id| labels.label(reps[*id as usize - 1])) {
                if id > 0 && !distinct.contains(&id) {
                    distinct.push(id);
                }
            }
            if distinct.len() >= 2 {
                let (a, c) = (distinct[0].min(distinct[1]), distinct[0].max(distinct[1]));
                h.linked = Some((a, c));
            } else {
                h.ambiguous = true;
            }
        }
        verdicts.push(HypothesisVerdict {
            id: h.id,
            state: h.state,
            k_open,
            merged,
            linked: h.linked.map(|(a, c)| [a, c]),
            ambiguous: h.ambiguous,
        });
    }

    let count = |s: HypothesisState| out.iter().filter(|h| h.state == s).count();
    let report = ValidationReport {
        version: VALIDATION_FORMAT_VERSION,
        k0,
        k_final: labels.count(),
        valid: count(HypothesisState::Valid),
        rejected: count(HypothesisState::Rejected),
        ambiguous: out.iter().filter(|h| h.ambiguous).count(),
        hypotheses: verdicts,
    };
    Ok(Validation {
        hypotheses: out,
        labels,
        report,
    })
}

/// A valid door and the segments it connects in the final labelling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoorLink {
    pub door: usize,
    /// Unordered pair, smaller id first. `None` when fewer than two
    /// segments touch the door.
    pub segments: Option<[u32; 2]>,
    /// More or fewer than two segments touch the door.
    pub ambiguous: bool,
}

/// Segments touching each valid door in the final labelling.
///
/// Looks at free cells within `seal_margin + 1` cells of the door region.
/// When more than two segments touch, the two with most contact cells win.
pub fn associate_doors(
    valid: &[DoorHypothesis],
    labels: &SegmentLabelMap,
    seal_margin: usize,
) -> Vec<DoorLink> {
    let (w, h) = (labels.width(), labels.height());
    let reach = seal_margin + 1;
    valid
        .iter()
        .map(|door| {
            let mut ring: BTreeSet<Cell> = BTreeSet::new();
            for cell in door.region.iter() {
                let (r0, c0) = (cell.row.saturating_sub(reach), cell.col.saturating_sub(reach));
                let r1 = (cell.row + reach).min(h.saturating_sub(1));
                let c1 = (cell.col + reach).min(w.saturating_sub(1));
                for r in r0..=r1 {
                    for c in c0..=c1 {
                        ring.insert(Cell::new(r, c));
                    }
                }
            }
            let mut contact: BTreeMap<u32, usize> = BTreeMap::new();
            for cell in ring {
                let l = labels.label(cell);
                if l > 0 {
                    *contact.entry(l).or_default() += 1;
                }
            }
            let mut ranked: Vec<(u32, usize)> = contact.into_iter().collect();
            ranked.sort_by_key(|(id, n)| (std::cmp::Reverse(*n), *id));
            let segments = (ranked.len() >= 2).then(|| {
                let (a, b) = (ranked[0].0, ranked[1].0);
                [a.min(b), a.max(b)]
            });
            DoorLink {
                door: door.id,
                segments,
                ambiguous: ranked.len() != 2,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::CellSet;
    use crate::segmentation::SegmentMethod;

    fn params() -> ValidationParams {
        ValidationParams {
            segment: SegmentParams {
                method: SegmentMethod::Components,
                min_size: 1,
            },
            seal_margin: 0,
        }
    }

    fn block(r0: usize, c0: usize, h: usize, w: usize) -> CellSet {
        (r0..r0 + h)
            .flat_map(|r| (c0..c0 + w).map(move |c| Cell::new(r, c)))
            .collect()
    }

    fn hyp(id: usize, cells: CellSet, w: usize, h: usize) -> DoorHypothesis {
        DoorHypothesis::from_cells(id, cells, 1.0, w, h).unwrap()
    }

    // Room on top, corridor below, wall on row 10 with a gap at cols 8..14.
    fn two_spaces() -> BinaryGrid {
        let mut rows: Vec<String> = Vec::new();
        for r in 0..20 {
            let row: String = (0..30)
                .map(|c| if r == 10 && !(8..14).contains(&c) { '#' } else { '.' })
                .collect();
            rows.push(row);
        }
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        BinaryGrid::from_rows(&refs)
    }

    #[test]
    fn true_door_valid_false_rejected() {
        let b = two_spaces();
        let door = hyp(0, block(10, 8, 1, 6), 30, 20);
        let fake = hyp(1, block(3, 3, 1, 6), 30, 20);
        let v = validate(&b, &[door, fake], &params()).unwrap();
        assert_eq!(v.report.k0, 2);
        assert_eq!(v.hypotheses[0].state, HypothesisState::Valid);
        assert_eq!(v.hypotheses[0].linked, Some((1, 2)));
        assert_eq!(v.hypotheses[1].state, HypothesisState::Rejected);
        assert_eq!(v.report.hypotheses[1].k_open, 2);
        assert_eq!(v.labels.count(), 2);
        // rejected cells revert to free
        assert!(v.labels.label(Cell::new(3, 5)) > 0);
        let links = associate_doors(&v.valid().cloned().collect::<Vec<_>>(), &v.labels, 0);
        assert_eq!(links, vec![DoorLink { door: 0, segments: Some([1, 2]), ambiguous: false }]);
    }

    #[test]
    fn empty_list() {
        let b = two_spaces();
        let v = validate(&b, &[], &params()).unwrap();
        assert_eq!(v.report.k0, 1);
        assert_eq!(v.report.valid, 0);
        assert_eq!(v.labels.count(), 1);
    }

    #[test]
    fn order_independent() {
        let b = two_spaces();
        let a = hyp(0, block(10, 8, 1, 6), 30, 20);
        let c = hyp(1, block(3, 3, 1, 6), 30, 20);
        let d = hyp(2, block(15, 20, 2, 6), 30, 20);
        let fwd = validate(&b, &[a.clone(), c.clone(), d.clone()], &params()).unwrap();
        let rev = validate(&b, &[d, c, a], &params()).unwrap();
        for h in &fwd.hypotheses {
            let other = rev.hypotheses.iter().find(|x| x.id == h.id).unwrap();
            assert_eq!(h.state, other.state);
            assert_eq!(h.linked, other.linked);
        }
        assert_eq!(fwd.labels, rev.labels);
    }

    #[test]
    fn double_door_maps_to_same_pair() {
        // wall with two gaps between the same two spaces
        let mut rows: Vec<String> = Vec::new();
        for r in 0..20 {
            rows.push(
                (0..30)
                    .map(|c| {
                        let gap = (4..8).contains(&c) || (20..24).contains(&c);
                        if r == 10 && !gap { '#' } else { '.' }
                    })
                    .collect(),
            );
        }
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        let b = BinaryGrid::from_rows(&refs);
        let hyps = [hyp(0, block(10, 4, 1, 4), 30, 20), hyp(1, block(10, 20, 1, 4), 30, 20)];
        let v = validate(&b, &hyps, &params()).unwrap();
        // each door alone still leaves the other closed, so both are valid
        assert_eq!(v.report.valid, 2);
        assert_eq!(v.hypotheses[0].linked, v.hypotheses[1].linked);
        let links = associate_doors(&v.hypotheses, &v.labels, 0);
        assert_eq!(links[0].segments, links[1].segments);
    }

    #[test]
    fn three_way_opening_is_ambiguous() {
        // a cross of walls with a plus-shaped hole joining four quadrants
        let mut rows: Vec<String> = Vec::new();
        for r in 0..21 {
            rows.push(
                (0..21)
                    .map(|c| {
                        let wall = r == 10 || c == 10;
                        let hole = (8..13).contains(&r) && (8..13).contains(&c);
                        if wall && !hole { '#' } else { '.' }
                    })
                    .collect(),
            );
        }
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        let b = BinaryGrid::from_rows(&refs);
        let v = validate(&b, &[hyp(0, block(8, 8, 5, 5), 21, 21)], &params()).unwrap();
        assert_eq!(v.report.k0, 4);
        assert_eq!(v.report.hypotheses[0].merged.len(), 4);
        assert!(v.hypotheses[0].ambiguous);
        assert_eq!(v.hypotheses[0].state, HypothesisState::Valid);
    }

    #[test]
    fn out_of_bounds_rejected() {
        let b = BinaryGrid::filled(5, 5, false);
        let h = hyp(0, block(3, 3, 3, 3), 10, 10);
        assert!(validate(&b, &[h], &params()).is_err());
    }
}
