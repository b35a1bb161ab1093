//! Ground-truth backend for end-to-end testing.

use crate::cells::{Cell, CellSet, PatchMask, PATCH_SIZE};
use crate::detector::DetectionBox;
use crate::geometry::RotatedRect;
use crate::grid::Patch;

/// Margin, in cells, a door rectangle keeps from every window border.
pub const ORACLE_MARGIN: usize = 4;

/// Whether `rect` lies inside the window at `origin` with `margin` cells to
/// spare on every side. Window edges are cell edges, half a cell beyond the
/// outermost cell centers.
pub fn door_in_window(rect: &RotatedRect, origin: Cell, margin: usize) -> bool {
    let lo_x = origin.col as f64 - 0.5 + margin as f64;
    let lo_y = origin.row as f64 - 0.5 + margin as f64;
    let hi_x = (origin.col + PATCH_SIZE) as f64 - 0.5 - margin as f64;
    let hi_y = (origin.row + PATCH_SIZE) as f64 - 0.5 - margin as f64;
    const EPS: f64 = 1e-9;
    rect.corners().iter().all(|p| {
        p.x >= lo_x - EPS && p.x <= hi_x + EPS && p.y >= lo_y - EPS && p.y <= hi_y + EPS
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleDoor {
    pub mbr: RotatedRect,
    pub cells: CellSet,
}

/// Reports confidence 1 with the union of door masks for every window that
/// fully contains a door, and 0 elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleDetector {
    pub doors: Vec<OracleDoor>,
    pub margin: usize,
}

impl OracleDetector {
    pub fn new(doors: Vec<OracleDoor>) -> Self {
        OracleDetector {
            doors,
            margin: ORACLE_MARGIN,
        }
    }

    pub fn detect(&self, patch: &Patch) -> DetectionBox {
        let mut cells = CellSet::new();
        for d in &self.doors {
            if door_in_window(&d.mbr, patch.origin, self.margin) {
                cells = cells.union(&d.cells);
            }
        }
        if cells.is_empty() {
            return DetectionBox {
                origin: patch.origin,
                confidence: 0.0,
                mask: None,
            };
        }
        DetectionBox {
            origin: patch.origin,
            confidence: 1.0,
            mask: Some(PatchMask::from_map_cells(&cells, patch.origin)),
        }
    }
}
