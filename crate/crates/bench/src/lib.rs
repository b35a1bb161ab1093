//! Shared fixtures for the benchmarks in `benches/`.

use semgrid::detector::{Backend, OracleDetector};
use semgrid::simulator::{apply_noise, generate_floorplan, FloorplanSpec, GroundTruth, NoiseKind, NoiseSpec};
use semgrid::OccupancyGrid;

/// Simulated map at combined noise `level`, seeded by `seed`.
pub fn simulated(seed: u64, level: u8) -> (OccupancyGrid, GroundTruth) {
    let (clean, gt) = generate_floorplan(&FloorplanSpec::with_seed(seed)).expect("default spec is feasible");
    let noise = NoiseSpec::new(NoiseKind::Combined, level).expect("noise level in range");
    (apply_noise(&clean, &noise, seed), gt)
}

pub fn oracle(gt: &GroundTruth) -> Backend {
    Backend::Oracle(OracleDetector::from_ground_truth(gt))
}
