//! Noise augmentation: additive Gaussian noise, and "combined" noise that
//! layers edge salt/pepper flips, Gaussian noise and free-space pepper.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{OccupancyGrid, Thresholds};

pub const MAX_NOISE_LEVEL: u8 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub level: u8,
}

/// Parameters derived from a noise level; all scale linearly with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseParams {
    /// Standard deviation in occupancy units.
    pub sigma: f64,
    /// Probability that an occupied edge cell turns free.
    pub edge_salt: f64,
    /// Probability that a free edge cell turns occupied.
    pub edge_pepper: f64,
    /// Probability that any free cell turns occupied.
    pub free_pepper: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, level: u8) -> Result<Self> {
        if level > MAX_NOISE_LEVEL {
            return Err(Error::InfeasibleSpec(format!(
                "noise level {level} exceeds {MAX_NOISE_LEVEL}"
            )));
        }
        Ok(NoiseSpec { kind, level })
    }

    pub fn params(&self) -> NoiseParams {
        let l = self.level.min(MAX_NOISE_LEVEL) as f64;
        NoiseParams {
            sigma: 0.015 * l,
            edge_salt: 0.03 * l,
            edge_pepper: 0.03 * l,
            free_pepper: 0.002 * l,
        }
    }
}

/// Known cells with an 8-neighbour of the opposite binary state.
pub fn edge_cells(grid: &OccupancyGrid, occupied: &[bool]) -> Vec<bool> {
    let (w, h) = (grid.width(), grid.height());
    let unknown = grid.unknown();
    let mut edge = vec![false; w * h];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if unknown[i] {
                continue;
            }
            'scan: for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                    if nr < 0 || nc < 0 || nr >= h as i64 || nc >= w as i64 {
                        continue;
                    }
                    let j = nr as usize * w + nc as usize;
                    if !unknown[j] && occupied[j] != occupied[i] {
                        edge[i] = true;
                        break 'scan;
                    }
                }
            }
        }
    }
    edge
}

/// Apply noise to every observed cell; unknown cells are left as they are.
pub fn apply_noise(grid: &OccupancyGrid, spec: &NoiseSpec, seed: u64) -> OccupancyGrid {
    if spec.level == 0 {
        return grid.clone();
    }
    let params = spec.params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let thresholds = Thresholds::default();
    let unknown = grid.unknown().to_vec();
    let mut cells = grid.cells().to_vec();

    if spec.kind == NoiseKind::Combined {
        let occupied: Vec<bool> = cells.iter().map(|p| thresholds.is_occupied(*p, false)).collect();
        let edge = edge_cells(grid, &occupied);
        for i in 0..cells.len() {
            if !edge[i] {
                continue;
            }
            if occupied[i] {
                if rng.random_bool(params.edge_salt) {
                    cells[i] = 0.0;
                }
            } else if rng.random_bool(params.edge_pepper) {
                cells[i] = 1.0;
            }
        }
    }

    let normal = Normal::new(0.0, params.sigma).expect("sigma is finite and positive");
    for (p, u) in cells.iter_mut().zip(&unknown) {
        if !*u {
            *p = (*p + normal.sample(&mut rng)).clamp(0.0, 1.0);
        }
    }

    if spec.kind == NoiseKind::Combined {
        for (p, u) in cells.iter_mut().zip(&unknown) {
            if !*u && !thresholds.is_occupied(*p, false) && rng.random_bool(params.free_pepper) {
                *p = 1.0;
            }
        }
    }

    OccupancyGrid::new(
        grid.width(),
        grid.height(),
        grid.resolution(),
        grid.origin(),
        cells,
        unknown,
    )
    .expect("noise preserves grid shape")
}
