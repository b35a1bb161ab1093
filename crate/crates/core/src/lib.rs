//! Semantic instance segmentation of occupancy grid maps.
//!
//! Doorways are detected on 64x64 sliding windows, clustered and fused into
//! door hypotheses, validated by repeated free-space segmentation, and the
//! resulting rooms and corridors are categorized and assembled into a
//! topometric map. A seeded floorplan simulator produces annotated maps and
//! training patches.

pub mod cells;
pub mod cluster;
pub mod detector;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod morphology;
pub mod pipeline;
pub mod place;
pub mod render;
pub mod segmentation;
pub mod simulator;
pub mod topometric;
pub mod validation;

pub use cells::{Cell, CellSet, PatchMask, PATCH_SIZE};
pub use error::{Error, Result};
pub use grid::{BinaryGrid, OccupancyGrid, Patch, Thresholds, UnknownPolicy};
