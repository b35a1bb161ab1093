//! Seeded floorplan simulator, noise augmentation and training samples.

mod floorplan;
mod noise;
mod samples;

pub use floorplan::{
    generate_floorplan, unknown_probability, CellClass, DoorAnnotation, FloorplanSpec,
    GroundTruth, GroundTruthDocument, Instance, InstanceKind, Interval,
    GROUND_TRUTH_FORMAT_VERSION, JUNCTION_CLEARANCE,
};
pub use noise::{apply_noise, edge_cells, NoiseKind, NoiseParams, NoiseSpec, MAX_NOISE_LEVEL};
pub use samples::{extract_training_samples, PatchLabel, TrainingSample};

use crate::detector::{OracleDetector, OracleDoor};

impl OracleDetector {
    pub fn from_ground_truth(gt: &GroundTruth) -> Self {
        OracleDetector::new(
            gt.doors
                .iter()
                .map(|d| OracleDoor {
                    mbr: d.mbr,
                    cells: d.cells.clone(),
                })
                .collect(),
        )
    }
}
