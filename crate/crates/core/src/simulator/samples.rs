//! Labeled training patches.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cells::{CellSet, PatchMask};
use crate::detector::{door_in_window, ORACLE_MARGIN};
use crate::error::Result;
use crate::grid::{window_origins, OccupancyGrid, Patch, TARGET_RESOLUTION};
use crate::simulator::GroundTruth;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatchLabel {
    Door,
    Background,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub patch: Patch,
    pub label: PatchLabel,
    /// Union of the contained doors, present on door patches only.
    pub mask: Option<PatchMask>,
}

/// Window origins labeled door, with the mask of every contained door.
fn label_windows(
    grid: &OccupancyGrid,
    gt: &GroundTruth,
    stride: usize,
) -> Result<Vec<(crate::cells::Cell, Option<CellSet>)>> {
    Ok(window_origins(grid.width(), grid.height(), stride)?
        .into_iter()
        .map(|origin| {
            let mut cells = CellSet::new();
            let mut hit = false;
            for d in &gt.doors {
                if door_in_window(&d.mbr, origin, ORACLE_MARGIN) {
                    cells = cells.union(&d.cells);
                    hit = true;
                }
            }
            (origin, hit.then_some(cells))
        })
        .collect())
}

/// Door and background patches. A window is a door patch iff some door
/// rectangle lies inside it with a 4-cell margin. Background patches are
/// subsampled (seeded) to the door count; without any door patch every
/// window is returned as background.
pub fn extract_training_samples(
    grid: &OccupancyGrid,
    gt: &GroundTruth,
    stride: usize,
    seed: u64,
) -> Result<Vec<TrainingSample>> {
    if (grid.resolution() - TARGET_RESOLUTION).abs() > 1e-12 {
        return Err(Error::InvalidGrid("training patches need a normalized grid".into()));
    }
    let labeled = label_windows(grid, gt, stride)?;
    let doors = labeled.iter().filter(|(_, m)| m.is_some()).count();
    let background: Vec<usize> = labeled
        .iter()
        .enumerate()
        .filter(|(_, (_, m))| m.is_none())
        .map(|(i, _)| i)
        .collect();
    let mut keep = vec![false; labeled.len()];
    for (i, (_, m)) in labeled.iter().enumerate() {
        keep[i] = m.is_some();
    }
    if doors == 0 || doors >= background.len() {
        for i in &background {
            keep[*i] = true;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in index::sample(&mut rng, background.len(), doors) {
            keep[background[k]] = true;
        }
    }
    Ok(labeled
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|((origin, mask), _)| TrainingSample {
            patch: Patch::from_grid(grid, origin),
            label: if mask.is_some() {
                PatchLabel::Door
            } else {
                PatchLabel::Background
            },
            mask: mask.map(|cells| PatchMask::from_map_cells(&cells, origin)),
        })
        .collect())
}
