//! External detections document.
//!
//! ```json
//! {
//!   "version": 1,
//!   "patch_size": 64,
//!   "stride": 8,
//!   "detections": [
//!     { "origin": [0, 0], "confidence": 0.12, "mask_rle": null },
//!     { "origin": [0, 8], "confidence": 0.97, "mask_rle": [1300, 20, 44, 20, 2712] }
//!   ]
//! }
//! ```
//!
//! One record per sliding window, in row-major window order. `mask_rle`
//! holds alternating run lengths over the row-major 64x64 mask, starting
//! with a run of zeros.

use serde::{Deserialize, Serialize};

use crate::cells::{Cell, PatchMask, PATCH_SIZE};
use crate::detector::DetectionBox;
use crate::error::{Error, Result};
use crate::grid::Patch;

pub const DETECTION_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub origin: [usize; 2],
    pub confidence: f64,
    #[serde(default)]
    pub mask_rle: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionDocument {
    pub version: u32,
    #[serde(default = "default_patch_size")]
    pub patch_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    pub detections: Vec<DetectionRecord>,
}

fn default_patch_size() -> usize {
    PATCH_SIZE
}

impl DetectionDocument {
    pub fn from_boxes(boxes: &[DetectionBox], stride: Option<usize>) -> Self {
        DetectionDocument {
            version: DETECTION_FORMAT_VERSION,
            patch_size: PATCH_SIZE,
            stride,
            detections: boxes
                .iter()
                .map(|b| DetectionRecord {
                    origin: [b.origin.row, b.origin.col],
                    confidence: b.confidence,
                    mask_rle: b.mask.as_ref().map(PatchMask::to_rle),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DetectionDocument = serde_json::from_str(text)
            .map_err(|e| Error::Detections(format!("malformed detections document: {e}")))?;
        doc.check()?;
        Ok(doc)
    }

    fn check(&self) -> Result<()> {
        if self.version != DETECTION_FORMAT_VERSION {
            return Err(Error::Detections(format!(
                "unsupported detections version {}",
                self.version
            )));
        }
        if self.patch_size != PATCH_SIZE {
            return Err(Error::Detections(format!(
                "patch size {} differs from {PATCH_SIZE}",
                self.patch_size
            )));
        }
        for (i, d) in self.detections.iter().enumerate() {
            if !(0.0..=1.0).contains(&d.confidence) {
                return Err(Error::Detections(format!(
                    "record {i}: confidence {} outside [0, 1]",
                    d.confidence
                )));
            }
        }
        Ok(())
    }

    /// Boxes aligned with `patches`; the record count and every origin must
    /// match the window sequence.
    pub fn to_boxes(&self, patches: &[Patch]) -> Result<Vec<DetectionBox>> {
        self.check()?;
        if self.detections.len() != patches.len() {
            return Err(Error::Detections(format!(
                "{} records for {} windows",
                self.detections.len(),
                patches.len()
            )));
        }
        self.detections
            .iter()
            .zip(patches)
            .enumerate()
            .map(|(i, (d, p))| {
                let origin = Cell::new(d.origin[0], d.origin[1]);
                if origin != p.origin {
                    return Err(Error::Detections(format!(
                        "record {i}: origin ({}, {}) but window is at ({}, {})",
                        origin.row, origin.col, p.origin.row, p.origin.col
                    )));
                }
                let mask = d
                    .mask_rle
                    .as_ref()
                    .map(|runs| {
                        PatchMask::from_rle(runs)
                            .map_err(|e| Error::Detections(format!("record {i}: {e}")))
                    })
                    .transpose()?;
                Ok(DetectionBox {
                    origin,
                    confidence: d.confidence,
                    mask,
                })
            })
            .collect()
    }
}
