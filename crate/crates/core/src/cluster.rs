//! Aggregation of door detections into door hypotheses: greedy IoU
//! clustering, mask fusion, minimum bounding rectangles and splitting of
//! falsely merged masks by erosion plus marker-based watershed.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::cells::{Cell, CellSet, CellSetRle};
use crate::detector::DetectionBox;
use crate::error::{Error, Result};
use crate::geometry::{min_area_rect, Point, RotatedRect};
use crate::morphology::{erode_2x2, inside_distance, label_components8, NEIGHBORS8};
use crate::segmentation::DisjointSet;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.7;
/// Largest accepted MBR area relative to the mask it approximates.
pub const MAX_AREA_RATIO: f64 = 4.0 / 3.0;
pub const MAX_SPLIT_DEPTH: usize = 4;

/// Axis-aligned cell rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRect {
    pub row: usize,
    pub col: usize,
    pub height: usize,
    pub width: usize,
}

impl CellRect {
    pub fn area(&self) -> usize {
        self.height * self.width
    }
}

/// Intersection over union of two cell rectangles.
pub fn iou(a: &CellRect, b: &CellRect) -> Result<f64> {
    if a.area() == 0 || b.area() == 0 {
        return Err(Error::ZeroAreaBox);
    }
    let r0 = a.row.max(b.row);
    let r1 = (a.row + a.height).min(b.row + b.height);
    let c0 = a.col.max(b.col);
    let c1 = (a.col + a.width).min(b.col + b.width);
    let inter = r1.saturating_sub(r0) * c1.saturating_sub(c0);
    let union = a.area() + b.area() - inter;
    Ok(inter as f64 / union as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionCluster {
    pub members: Vec<DetectionBox>,
    /// Highest member confidence.
    pub confidence: f64,
}

fn by_confidence(a: &DetectionBox, b: &DetectionBox) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then(a.origin.cmp(&b.origin))
}

/// Greedy clustering: the most confident unassigned box seeds a cluster and
/// absorbs every unassigned box whose IoU with the seed exceeds `threshold`.
pub fn cluster(boxes: &[DetectionBox], threshold: f64) -> Vec<DetectionCluster> {
    let mut order: Vec<&DetectionBox> = boxes.iter().collect();
    order.sort_by(|a, b| by_confidence(a, b));
    let mut assigned = vec![false; order.len()];
    let mut clusters = Vec::new();
    for i in 0..order.len() {
        if assigned[i] {
            continue;
        }
        assigned[i] = true;
        let seed = order[i];
        let mut members = vec![seed.clone()];
        for j in i + 1..order.len() {
            if assigned[j] {
                continue;
            }
            // window rects are never empty
            let overlap = iou(&seed.rect(), &order[j].rect()).unwrap_or(0.0);
            if overlap > threshold {
                assigned[j] = true;
                members.push(order[j].clone());
            }
        }
        clusters.push(DetectionCluster {
            confidence: seed.confidence,
            members,
        });
    }
    clusters
}

/// Pixelwise OR of all member masks in map coordinates.
pub fn fuse_masks(c: &DetectionCluster) -> Result<CellSet> {
    let mut fused = CellSet::new();
    for m in &c.members {
        let mask = m.mask.as_ref().ok_or_else(|| {
            Error::Mask(format!(
                "detection at ({}, {}) has no mask",
                m.origin.row, m.origin.col
            ))
        })?;
        fused = fused.union(&mask.to_map_cells(m.origin));
    }
    Ok(fused)
}

/// Minimum-area rectangle over cell centers, grown by half a cell per side
/// so every unit cell is covered.
pub fn mbr(cells: &CellSet) -> Result<RotatedRect> {
    let pts: Vec<Point> = cells.iter().map(Cell::center).collect();
    min_area_rect(&pts)
        .map(|r| r.inflate(0.5))
        .ok_or(Error::EmptyCells)
}

/// MBR area over cell count.
pub fn area_ratio(cells: &CellSet) -> Result<f64> {
    Ok(mbr(cells)?.area() / cells.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitMask {
    pub cells: CellSet,
    /// Set when the mask violates the area bound but could not be split.
    pub unsplittable: bool,
}

/// Split a fused mask whose MBR is too loose into sub-masks.
pub fn split_if_merged(cells: &CellSet) -> Result<Vec<SplitMask>> {
    if cells.is_empty() {
        return Err(Error::EmptyCells);
    }
    Ok(split_rec(cells, 0))
}

fn split_rec(cells: &CellSet, depth: usize) -> Vec<SplitMask> {
    let rect = mbr(cells).expect("nonempty");
    if rect.area() <= MAX_AREA_RATIO * cells.len() as f64 {
        return vec![SplitMask {
            cells: cells.clone(),
            unsplittable: false,
        }];
    }
    let stuck = || {
        vec![SplitMask {
            cells: cells.clone(),
            unsplittable: true,
        }]
    };
    if depth >= MAX_SPLIT_DEPTH {
        return stuck();
    }
    let Some(parts) = erode_and_flood(cells) else {
        return stuck();
    };
    // a partition that does not tighten the rectangles is not a real split
    let parts_area: f64 = parts.iter().map(|p| mbr(p).expect("nonempty").area()).sum();
    if parts_area >= rect.area() {
        return stuck();
    }
    parts.iter().flat_map(|p| split_rec(p, depth + 1)).collect()
}

/// Erode with the 2x2 kernel until at least two 8-connected components
/// appear, then flood the original mask from them over its negated
/// distance transform.
fn erode_and_flood(cells: &CellSet) -> Option<Vec<CellSet>> {
    let local = cells.to_local()?;
    let (w, h) = (local.width, local.height);
    let original = local.bits.clone();
    let mut current = original.clone();
    let markers = loop {
        let (labels, n) = label_components8(&current, w, h);
        if n >= 2 {
            break labels;
        }
        if n == 0 {
            return None;
        }
        current = erode_2x2(&current, w, h);
    };
    let dist = inside_distance(&original, w, h);
    let labels = watershed(&original, &dist, &markers, w, h);
    let mut parts: Vec<Vec<Cell>> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        if *l == 0 {
            continue;
        }
        let idx = *l as usize - 1;
        if parts.len() <= idx {
            parts.resize(idx + 1, Vec::new());
        }
        parts[idx].push(Cell::new(local.row0 + i / w, local.col0 + i % w));
    }
    let parts: Vec<CellSet> = parts
        .into_iter()
        .filter(|p| !p.is_empty())
        .map(|p| p.into_iter().collect())
        .collect();
    (parts.len() >= 2).then_some(parts)
}

#[derive(PartialEq)]
struct Flood {
    height: f64,
    seq: u64,
    index: usize,
}

impl Eq for Flood {}

impl Ord for Flood {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (height, seq)
        other
            .height
            .total_cmp(&self.height)
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Flood {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Marker-based watershed on the surface `-dist`, 8-connected, restricted
/// to `mask`. Every mask cell reachable from a marker receives its label.
pub fn watershed(mask: &[bool], dist: &[f64], markers: &[u32], w: usize, h: usize) -> Vec<u32> {
    let mut labels: Vec<u32> = markers
        .iter()
        .zip(mask)
        .map(|(m, inside)| if *inside { *m } else { 0 })
        .collect();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for (i, l) in labels.iter().enumerate() {
        if *l > 0 {
            heap.push(Flood {
                height: -dist[i],
                seq,
                index: i,
            });
            seq += 1;
        }
    }
    while let Some(Flood { index, .. }) = heap.pop() {
        let label = labels[index];
        let (r, c) = ((index / w) as i64, (index % w) as i64);
        for (dr, dc) in NEIGHBORS8 {
            let (rr, cc) = (r + dr, c + dc);
            if rr < 0 || cc < 0 || rr >= h as i64 || cc >= w as i64 {
                continue;
            }
            let j = rr as usize * w + cc as usize;
            if mask[j] && labels[j] == 0 {
                labels[j] = label;
                heap.push(Flood {
                    height: -dist[j],
                    seq,
                    index: j,
                });
                seq += 1;
            }
        }
    }
    labels
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisState {
    Candidate,
    Valid,
    Rejected,
}

/// A doorway candidate: a fused mask and its rectangle approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct DoorHypothesis {
    pub id: usize,
    /// Fused (sub-)mask in map cells.
    pub cells: CellSet,
    pub mbr: RotatedRect,
    /// MBR area / mask cell count.
    pub area_ratio: f64,
    /// Cells closed or opened for this door: the mask plus the rasterized MBR.
    pub region: CellSet,
    pub confidence: f64,
    pub state: HypothesisState,
    /// Segment ids this door connects, once validated.
    pub linked: Option<(u32, u32)>,
    pub unsplittable: bool,
    /// Opening this door alone merged more than two segments.
    pub ambiguous: bool,
}

impl DoorHypothesis {
    pub fn from_cells(
        id: usize,
        cells: CellSet,
        confidence: f64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let rect = mbr(&cells)?;
        let region = cells.union(&rect.raster(width, height));
        Ok(DoorHypothesis {
            id,
            area_ratio: rect.area() / cells.len() as f64,
            mbr: rect,
            region,
            cells,
            confidence,
            state: HypothesisState::Candidate,
            linked: None,
            unsplittable: false,
            ambiguous: false,
        })
    }
}

/// 8-connected components of a cell set, ordered by first cell.
pub fn components8(cells: &CellSet) -> Vec<CellSet> {
    let index: HashMap<Cell, usize> = cells.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut ds = DisjointSet::new(cells.len());
    for (i, c) in cells.iter().enumerate() {
        for (dr, dc) in [(0i64, 1i64), (1, -1), (1, 0), (1, 1)] {
            let (r, cc) = (c.row as i64 + dr, c.col as i64 + dc);
            if r < 0 || cc < 0 {
                continue;
            }
            if let Some(&j) = index.get(&Cell::new(r as usize, cc as usize)) {
                ds.union(i, j);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Cell>)> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for (i, c) in cells.iter().enumerate() {
        let root = ds.find(i);
        let k = *slot.entry(root).or_insert_with(|| {
            groups.push((root, Vec::new()));
            groups.len() - 1
        });
        groups[k].1.push(c);
    }
    groups.into_iter().map(|(_, v)| v.into_iter().collect()).collect()
}

/// Group masks that overlap or touch (8-neighbourhood) into unions.
pub fn merge_touching(masks: &[(CellSet, f64)]) -> Vec<(CellSet, f64)> {
    let mut owner: HashMap<Cell, usize> = HashMap::new();
    let mut ds = DisjointSet::new(masks.len());
    for (i, (cells, _)) in masks.iter().enumerate() {
        for c in cells.iter() {
            if let Some(j) = owner.insert(c, i) {
                ds.union(i, j);
            }
        }
    }
    for (i, (cells, _)) in masks.iter().enumerate() {
        for c in cells.iter() {
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (r, cc) = (c.row as i64 + dr, c.col as i64 + dc);
                    if r < 0 || cc < 0 {
                        continue;
                    }
                    if let Some(j) = owner.get(&Cell::new(r as usize, cc as usize)) {
                        ds.union(i, *j);
                    }
                }
            }
        }
    }
    let mut groups: Vec<(usize, CellSet, f64)> = Vec::new();
    let mut root_slot: HashMap<usize, usize> = HashMap::new();
    for (i, (cells, conf)) in masks.iter().enumerate() {
        let root = ds.find(i);
        match root_slot.get(&root) {
            Some(slot) => {
                let g = &mut groups[*slot];
                g.1 = g.1.union(cells);
                g.2 = g.2.max(*conf);
            }
            None => {
                root_slot.insert(root, groups.len());
                groups.push((i, cells.clone(), *conf));
            }
        }
    }
    let mut out: Vec<(CellSet, f64)> = groups.into_iter().map(|(_, c, f)| (c, f)).collect();
    out.sort_by(|a, b| a.0.as_slice().first().cmp(&b.0.as_slice().first()));
    out
}

/// Clusters to hypotheses: fuse, merge touching masks, split, approximate.
pub fn build_hypotheses(
    clusters: &[DetectionCluster],
    width: usize,
    height: usize,
) -> Result<Vec<DoorHypothesis>> {
    let mut fused = Vec::with_capacity(clusters.len());
    for c in clusters {
        let cells = fuse_masks(c)?;
        // a cluster can cover two doors whose masks never touch
        for part in components8(&cells) {
            fused.push((part, c.confidence));
        }
    }
    let mut hyps = Vec::new();
    for (cells, conf) in merge_touching(&fused) {
        for part in split_if_merged(&cells)? {
            let mut h = DoorHypothesis::from_cells(hyps.len(), part.cells, conf, width, height)?;
            h.unsplittable = part.unsplittable;
            hyps.push(h);
        }
    }
    Ok(hyps)
}

/// Serialized hypothesis for pipeline checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    pub id: usize,
    pub mask: CellSetRle,
    /// MBR corners as (row, col), counter-clockwise in (col, row) space.
    pub mbr_corners: [[f64; 2]; 4],
    pub confidence: f64,
    pub state: HypothesisState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linked: Option<[u32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisDocument {
    pub version: u32,
    pub width: usize,
    pub height: usize,
    pub hypotheses: Vec<HypothesisRecord>,
}

pub const HYPOTHESIS_FORMAT_VERSION: u32 = 1;

pub fn export_hypotheses(hyps: &[DoorHypothesis], width: usize, height: usize) -> HypothesisDocument {
    HypothesisDocument {
        version: HYPOTHESIS_FORMAT_VERSION,
        width,
        height,
        hypotheses: hyps
            .iter()
            .map(|h| HypothesisRecord {
                id: h.id,
                mask: h.cells.to_rle(),
                mbr_corners: h.mbr.corners().map(|p| [p.y, p.x]),
                confidence: h.confidence,
                state: h.state,
                linked: h.linked.map(|(a, b)| [a, b]),
            })
            .collect(),
    }
}

pub fn import_hypotheses(doc: &HypothesisDocument) -> Result<Vec<DoorHypothesis>> {
    if doc.version != HYPOTHESIS_FORMAT_VERSION {
        return Err(Error::Hypotheses(format!(
            "unsupported version {}",
            doc.version
        )));
    }
    doc.hypotheses
        .iter()
        .map(|r| {
            let cells = CellSet::from_rle(&r.mask)?;
            if cells.is_empty() {
                return Err(Error::Hypotheses(format!("hypothesis {} has an empty mask", r.id)));
            }
            let mut h = DoorHypothesis::from_cells(r.id, cells, r.confidence, doc.width, doc.height)?;
            h.state = r.state;
            h.linked = r.linked.map(|[a, b]| (a, b));
            Ok(h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::PatchMask;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn rect(row: usize, col: usize) -> CellRect {
        CellRect {
            row,
            col,
            height: 64,
            width: 64,
        }
    }

    fn block(r0: usize, c0: usize, h: usize, w: usize) -> CellSet {
        (r0..r0 + h)
            .flat_map(|r| (c0..c0 + w).map(move |c| Cell::new(r, c)))
            .collect()
    }

    fn det(row: usize, col: usize, conf: f64) -> DetectionBox {
        DetectionBox {
            origin: Cell::new(row, col),
            confidence: conf,
            mask: None,
        }
    }

    #[test]
    fn iou_values() {
        assert_eq!(iou(&rect(0, 0), &rect(0, 0)).unwrap(), 1.0);
        assert_eq!(iou(&rect(0, 0), &rect(0, 100)).unwrap(), 0.0);
        assert_eq!(iou(&rect(0, 0), &rect(0, 8)).unwrap(), 3584.0 / 4608.0);
        assert_eq!(iou(&rect(0, 0), &rect(8, 8)).unwrap(), 3136.0 / 5056.0);
        let empty = CellRect {
            row: 0,
            col: 0,
            height: 0,
            width: 5,
        };
        assert!(matches!(iou(&empty, &rect(0, 0)), Err(Error::ZeroAreaBox)));
    }

    #[test]
    fn clustering_examples() {
        assert_eq!(cluster(&[det(0, 0, 0.9)], 0.7).len(), 1);
        assert_eq!(cluster(&[det(0, 0, 0.9), det(0, 8, 0.8)], 0.7).len(), 1);
        assert_eq!(cluster(&[det(0, 0, 0.9), det(8, 8, 0.8)], 0.7).len(), 2);
        assert!(cluster(&[], 0.7).is_empty());
        // seed is the most confident box
        let c = cluster(&[det(0, 0, 0.5), det(0, 8, 0.95)], 0.7);
        assert_eq!(c[0].members[0].origin, Cell::new(0, 8));
        assert_eq!(c[0].confidence, 0.95);
    }

    fn with_mask(origin: Cell, cells: &CellSet) -> DetectionBox {
        DetectionBox {
            origin,
            confidence: 1.0,
            mask: Some(PatchMask::from_map_cells(cells, origin)),
        }
    }

    #[test]
    fn fusion_counts() {
        let a = block(0, 0, 4, 10);
        let one = DetectionCluster {
            members: vec![with_mask(Cell::new(0, 0), &a)],
            confidence: 1.0,
        };
        assert_eq!(fuse_masks(&one).unwrap(), a);

        let b = block(10, 0, 5, 10);
        let disjoint = DetectionCluster {
            members: vec![with_mask(Cell::new(0, 0), &a), with_mask(Cell::new(0, 0), &b)],
            confidence: 1.0,
        };
        assert_eq!(fuse_masks(&disjoint).unwrap().len(), 90);

        let c = block(3, 0, 5, 10);
        let shared = DetectionCluster {
            members: vec![with_mask(Cell::new(0, 0), &a), with_mask(Cell::new(0, 0), &c)],
            confidence: 1.0,
        };
        assert_eq!(fuse_masks(&shared).unwrap().len(), 80);

        let missing = DetectionCluster {
            members: vec![det(0, 0, 1.0)],
            confidence: 1.0,
        };
        assert!(fuse_masks(&missing).is_err());
    }

    #[test]
    fn mbr_examples() {
        let one: CellSet = [Cell::new(3, 3)].into_iter().collect();
        assert_abs_diff_eq!(mbr(&one).unwrap().area(), 1.0, epsilon = 1e-9);
        let r = mbr(&block(5, 5, 3, 10)).unwrap();
        assert_abs_diff_eq!(r.area(), 30.0, epsilon = 1e-9);
        assert!(matches!(mbr(&CellSet::new()), Err(Error::EmptyCells)));
    }

    #[test]
    fn mbr_of_rotated_block() {
        // rasterize a 3x10 rectangle rotated by 45 degrees
        let theta = std::f64::consts::FRAC_PI_4;
        let analytic = RotatedRect {
            center: Point::new(20.0, 20.0),
            angle: theta,
            half_length: 5.0,
            half_width: 1.5,
        };
        let cells = analytic.raster(40, 40);
        let pts: Vec<Point> = cells.iter().map(Cell::center).collect();
        let core = min_area_rect(&pts).unwrap();
        assert!((core.area() - 30.0).abs() <= 0.15 * 30.0, "area {}", core.area());
        let r = mbr(&cells).unwrap();
        let quarter = std::f64::consts::FRAC_PI_2;
        let off = (r.angle - theta).rem_euclid(quarter);
        let diff = off.min(quarter - off);
        assert!(diff.to_degrees() <= 5.0, "angle {}", r.angle.to_degrees());
        // the half-cell margin adds one cell to each side length
        let expected = (2.0 * core.half_length + 1.0) * (2.0 * core.half_width + 1.0);
        assert_abs_diff_eq!(r.area(), expected, epsilon = 1e-9);
    }

    #[test]
    fn compact_mask_unchanged() {
        let m = block(0, 0, 4, 20);
        let parts = split_if_merged(&m).unwrap();
        assert_eq!(parts, vec![SplitMask { cells: m, unsplittable: false }]);
    }

    #[test]
    fn l_shaped_pair_splits_in_two() {
        // horizontal 4x20 door plus vertical 20x4 door touching at a 2-cell seam
        let a = block(0, 0, 4, 20);
        let b = block(4, 18, 20, 4);
        let merged = a.union(&b);
        let parts = split_if_merged(&merged).unwrap();
        assert_eq!(parts.len(), 2);
        for p in &parts {
            assert!(!p.unsplittable);
            let n = p.cells.len() as f64;
            assert!((n - 80.0).abs() <= 8.0, "part size {n}");
        }
        let total: usize = parts.iter().map(|p| p.cells.len()).sum();
        assert_eq!(total, merged.len());
    }

    #[test]
    fn three_masks_with_bridges() {
        // three 4x20 masks along one axis, one cell apart, the middle one
        // raised by two rows, each junction bridged by a single cell
        let m = block(2, 0, 4, 20)
            .union(&block(0, 21, 4, 20))
            .union(&block(2, 42, 4, 20))
            .union(&[Cell::new(3, 20), Cell::new(3, 41)].into_iter().collect());
        assert!(area_ratio(&m).unwrap() > MAX_AREA_RATIO);
        let parts = split_if_merged(&m).unwrap();
        assert_eq!(parts.len(), 3);
        for p in &parts {
            assert!(!p.unsplittable);
            assert!((80..=82).contains(&p.cells.len()), "part size {}", p.cells.len());
        }
    }

    #[test]
    fn disconnected_far_masks_split() {
        let m = block(0, 0, 4, 20).union(&block(30, 40, 4, 20));
        let parts = split_if_merged(&m).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].cells, block(0, 0, 4, 20));
    }

    #[test]
    fn cluster_covering_two_doors_yields_two_hypotheses() {
        let a = block(10, 5, 4, 16);
        let b = block(40, 30, 16, 4);
        let c = DetectionCluster {
            members: vec![with_mask(Cell::new(0, 0), &a.union(&b))],
            confidence: 0.9,
        };
        let hyps = build_hypotheses(&[c], 64, 64).unwrap();
        assert_eq!(hyps.len(), 2);
        assert_eq!(hyps[0].cells, a);
        assert_eq!(hyps[1].cells, b);
        assert_eq!(components8(&block(0, 0, 2, 2).union(&block(2, 2, 1, 1))).len(), 1);
    }

    #[test]
    fn hypothesis_roundtrip() {
        let h = DoorHypothesis::from_cells(3, block(2, 2, 4, 14), 0.8, 50, 50).unwrap();
        let doc = export_hypotheses(std::slice::from_ref(&h), 50, 50);
        let back = import_hypotheses(&doc).unwrap();
        assert_eq!(back, vec![h]);
    }

    fn mask_strategy() -> impl Strategy<Value = CellSet> {
        proptest::collection::vec((0usize..30, 0usize..30), 1..120)
            .prop_map(|v| v.into_iter().map(|(r, c)| Cell::new(r, c)).collect())
    }

    proptest! {
        #[test]
        fn split_partitions_input(m in mask_strategy()) {
            let parts = split_if_merged(&m).unwrap();
            let mut union = CellSet::new();
            let mut total = 0;
            for p in &parts {
                prop_assert!(!p.cells.is_empty());
                total += p.cells.len();
                union = union.union(&p.cells);
                if !p.unsplittable {
                    prop_assert!(area_ratio(&p.cells).unwrap() <= MAX_AREA_RATIO + 1e-9);
                }
            }
            prop_assert_eq!(total, m.len());
            prop_assert_eq!(union, m);
        }

        #[test]
        fn mbr_covers_mask(m in mask_strategy()) {
            let r = mbr(&m).unwrap();
            prop_assert!(r.area() >= m.len() as f64 - 1e-9);
            for c in m.iter() {
                prop_assert!(r.contains(c.center(), 1e-9));
            }
        }

        #[test]
        fn clusters_partition_boxes(origins in proptest::collection::vec((0usize..6, 0usize..6, 0u32..100), 0..30)) {
            let boxes: Vec<DetectionBox> = origins
                .iter()
                .map(|(r, c, p)| det(r * 8, c * 8, *p as f64 / 100.0))
                .collect();
            let clusters = cluster(&boxes, 0.7);
            let n: usize = clusters.iter().map(|c| c.members.len()).sum();
            prop_assert_eq!(n, boxes.len());
            for c in &clusters {
                for m in &c.members[1..] {
                    prop_assert!(iou(&c.members[0].rect(), &m.rect()).unwrap() > 0.7);
                }
            }
        }
    }
}
