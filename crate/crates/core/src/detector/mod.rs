//! Per-patch door detection behind a pluggable backend: a deterministic
//! gap detector, ingestion of externally produced detections, or a
//! ground-truth oracle.

mod baseline;
mod ingest;
mod oracle;

pub use baseline::{baseline_detect, BaselineParams};
pub use ingest::{DetectionDocument, DetectionRecord, DETECTION_FORMAT_VERSION};
pub use oracle::{door_in_window, OracleDetector, OracleDoor, ORACLE_MARGIN};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cells::{Cell, PatchMask, PATCH_SIZE};
use crate::cluster::CellRect;
use crate::error::{Error, Result};
use crate::grid::Patch;

/// Default confidence threshold. Any gap accepted by the baseline scores at
/// least 0.5, so this keeps every structural match.
pub const DEFAULT_CONFIDENCE: f64 = 0.5;

/// Door confidence and optional mask for one 64x64 window.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionBox {
    pub origin: Cell,
    pub confidence: f64,
    pub mask: Option<PatchMask>,
}

impl DetectionBox {
    pub fn rect(&self) -> CellRect {
        CellRect {
            row: self.origin.row,
            col: self.origin.col,
            height: PATCH_SIZE,
            width: PATCH_SIZE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Baseline,
    Ingest,
    Oracle,
}

#[derive(Debug, Clone)]
pub enum Backend {
    Baseline(BaselineParams),
    Ingest(DetectionDocument),
    Oracle(OracleDetector),
}

impl Backend {
    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Baseline(_) => BackendKind::Baseline,
            Backend::Ingest(_) => BackendKind::Ingest,
            Backend::Oracle(_) => BackendKind::Oracle,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DetectorConfig {
    pub threshold: f64,
    pub backend: Backend,
}

impl DetectorConfig {
    pub fn new(threshold: f64, backend: Backend) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Detections(format!(
                "confidence threshold {threshold} outside [0, 1]"
            )));
        }
        Ok(DetectorConfig { threshold, backend })
    }
}

/// One detection per patch, in patch order.
pub fn detect(patches: &[Patch], backend: &Backend) -> Result<Vec<DetectionBox>> {
    match backend {
        Backend::Baseline(params) => Ok(patches
            .par_iter()
            .map(|p| {
                let (confidence, mask) = baseline_detect(p, params);
                DetectionBox {
                    origin: p.origin,
                    confidence,
                    mask,
                }
            })
            .collect()),
        Backend::Ingest(doc) => doc.to_boxes(patches),
        Backend::Oracle(oracle) => Ok(patches.par_iter().map(|p| oracle.detect(p)).collect()),
    }
}

/// Boxes with confidence at or above `threshold`, in input order.
pub fn filter_detections(boxes: &[DetectionBox], threshold: f64) -> Vec<DetectionBox> {
    boxes
        .iter()
        .filter(|b| b.confidence >= threshold)
        .cloned()
        .collect()
}
