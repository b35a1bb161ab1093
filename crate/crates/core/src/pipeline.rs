//! End-to-end run: normalize, window, detect, filter, cluster, fuse,
//! validate, categorize and build the topometric map.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{build_hypotheses, cluster, DoorHypothesis, DEFAULT_IOU_THRESHOLD};
use crate::detector::{detect, filter_detections, Backend, DetectionBox, DEFAULT_CONFIDENCE};
use crate::error::Error;
use crate::grid::{
    binarize, normalize_resolution, sliding_windows, BinaryGrid, OccupancyGrid, Thresholds,
    DEFAULT_STRIDE,
};
use crate::place::{categorize, PlaceParams, ScoreTable};
use crate::topometric::{build, MapFrame, TopometricMap};
use crate::validation::{associate_doors, validate, DoorLink, Validation, ValidationParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Normalize,
    Binarize,
    Windows,
    Detect,
    Cluster,
    Validate,
    Categorize,
    Topometric,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Normalize => "normalize",
            Stage::Binarize => "binarize",
            Stage::Windows => "windows",
            Stage::Detect => "detect",
            Stage::Cluster => "cluster",
            Stage::Validate => "validate",
            Stage::Categorize => "categorize",
            Stage::Topometric => "topometric",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T, Error> {
    fn at(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub thresholds: Thresholds,
    pub stride: usize,
    /// Detections below this confidence are dropped.
    pub confidence: f64,
    /// Boxes join a cluster seed when their IoU exceeds this.
    pub iou: f64,
    pub validation: ValidationParams,
    pub place: PlaceParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            thresholds: Thresholds::default(),
            stride: DEFAULT_STRIDE,
            confidence: DEFAULT_CONFIDENCE,
            iou: DEFAULT_IOU_THRESHOLD,
            validation: ValidationParams::default(),
            place: PlaceParams::default(),
        }
    }
}

/// Detection half of a run.
#[derive(Debug, Clone)]
pub struct Detection {
    pub grid: OccupancyGrid,
    /// One box per window, before filtering.
    pub detections: Vec<DetectionBox>,
    pub kept: usize,
    pub clusters: usize,
    pub hypotheses: Vec<DoorHypothesis>,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    /// Input at the working resolution.
    pub grid: OccupancyGrid,
    pub binary: BinaryGrid,
    /// Empty when the run started from hypotheses.
    pub detections: Vec<DetectionBox>,
    pub kept: usize,
    pub clusters: usize,
    pub validation: Validation,
    pub links: Vec<DoorLink>,
    pub scores: ScoreTable,
    pub map: TopometricMap,
}

impl PipelineRun {
    pub fn doors_found(&self) -> bool {
        self.validation.report.valid > 0
    }
}

fn check_config(cfg: &PipelineConfig) -> Result<(), Error> {
    cfg.thresholds.validate()?;
    if cfg.stride == 0 {
        return Err(Error::InvalidGrid("stride must be positive".into()));
    }
    for (name, v) in [("confidence", cfg.confidence), ("iou", cfg.iou)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Detections(format!("{name} {v} outside [0, 1]")));
        }
    }
    Ok(())
}

/// Normalize, window, detect, filter, cluster and fuse.
pub fn detect_doors(
    grid: &OccupancyGrid,
    backend: &Backend,
    cfg: &PipelineConfig,
) -> Result<Detection, StageError> {
    check_config(cfg).at(Stage::Normalize)?;
    let grid = normalize_resolution(grid).at(Stage::Normalize)?;
    let patches = sliding_windows(&grid, cfg.stride).at(Stage::Windows)?;
    let detections = detect(&patches, backend).at(Stage::Detect)?;
    let kept = filter_detections(&detections, cfg.confidence);
    let clusters = cluster(&kept, cfg.iou);
    let hypotheses =
        build_hypotheses(&clusters, grid.width(), grid.height()).at(Stage::Cluster)?;
    Ok(Detection {
        grid,
        kept: kept.len(),
        clusters: clusters.len(),
        detections,
        hypotheses,
    })
}

/// Validate, categorize and build from ready hypotheses. `grid` must
/// already be at the working resolution.
pub fn run_from_hypotheses(
    grid: &OccupancyGrid,
    hypotheses: &[DoorHypothesis],
    cfg: &PipelineConfig,
) -> Result<PipelineRun, StageError> {
    check_config(cfg).at(Stage::Binarize)?;
    let binary = binarize(grid, &cfg.thresholds).at(Stage::Binarize)?;
    let validation = validate(&binary, hypotheses, &cfg.validation).at(Stage::Validate)?;
    let valid: Vec<DoorHypothesis> = validation.valid().cloned().collect();
    let links = associate_doors(&valid, &validation.labels, cfg.validation.seal_margin);
    let pairs: Vec<[u32; 2]> = links.iter().filter_map(|l| l.segments).collect();
    let scores = categorize(&validation.labels, &pairs, &cfg.place).at(Stage::Categorize)?;
    let map = build(&validation.labels, &valid, &links, &scores, &MapFrame::of(grid))
        .at(Stage::Topometric)?;
    Ok(PipelineRun {
        grid: grid.clone(),
        binary,
        detections: Vec::new(),
        kept: 0,
        clusters: 0,
        validation,
        links,
        scores,
        map,
    })
}

/// The full pipeline.
pub fn run(
    grid: &OccupancyGrid,
    backend: &Backend,
    cfg: &PipelineConfig,
) -> Result<PipelineRun, StageError> {
    let det = detect_doors(grid, backend, cfg)?;
    let mut out = run_from_hypotheses(&det.grid, &det.hypotheses, cfg)?;
    out.detections = det.detections;
    out.kept = det.kept;
    out.clusters = det.clusters;
    Ok(out)
}
