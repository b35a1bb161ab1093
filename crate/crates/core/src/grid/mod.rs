//! Occupancy grids, binarization, resolution normalization and sliding windows.

use serde::{Deserialize, Serialize};

use crate::cells::{Cell, PATCH_SIZE};
use crate::error::{Error, Result};

pub mod io;

/// Working resolution of the whole pipeline, meters per cell.
pub const TARGET_RESOLUTION: f64 = 0.05;
pub const DEFAULT_OCCUPIED_THRESH: f64 = 0.65;
pub const DEFAULT_FREE_THRESH: f64 = 0.196;
pub const DEFAULT_UNKNOWN_PIXEL: u8 = 205;
pub const DEFAULT_STRIDE: usize = 8;

/// Occupancy probabilities on a regular lattice, row-major, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    /// World position (meters) of the lower-left corner of the map.
    origin: [f64; 2],
    cells: Vec<f64>,
    unknown: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        origin: [f64; 2],
        cells: Vec<f64>,
        unknown: Vec<bool>,
    ) -> Result<Self> {
        if resolution <= 0.0 || !resolution.is_finite() {
            return Err(Error::InvalidGrid(format!("resolution {resolution} must be > 0")));
        }
        if cells.len() != width * height || unknown.len() != width * height {
            return Err(Error::InvalidGrid(format!(
                "expected {} cells for {width}x{height}, got {} probabilities and {} unknown flags",
                width * height,
                cells.len(),
                unknown.len()
            )));
        }
        if let Some(p) = cells.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidGrid(format!("probability {p} outside [0, 1]")));
        }
        Ok(OccupancyGrid {
            width,
            height,
            resolution,
            origin,
            cells,
            unknown,
        })
    }

    /// Uniform grid at the target resolution with every cell known.
    pub fn filled(width: usize, height: usize, p: f64) -> Self {
        OccupancyGrid::new(
            width,
            height,
            TARGET_RESOLUTION,
            [0.0, 0.0],
            vec![p; width * height],
            vec![false; width * height],
        )
        .expect("valid uniform grid")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn unknown(&self) -> &[bool] {
        &self.unknown
    }

    #[inline]
    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    #[inline]
    pub fn get(&self, cell: Cell) -> f64 {
        self.cells[self.index(cell)]
    }

    #[inline]
    pub fn is_unknown(&self, cell: Cell) -> bool {
        self.unknown[self.index(cell)]
    }

    /// Set a probability, clamped into [0, 1].
    pub fn set(&mut self, cell: Cell, p: f64) {
        let i = self.index(cell);
        self.cells[i] = p.clamp(0.0, 1.0);
    }

    pub fn set_unknown(&mut self, cell: Cell, unknown: bool) {
        let i = self.index(cell);
        self.unknown[i] = unknown;
    }

    /// World coordinates (meters) of a cell center.
    pub fn cell_to_world(&self, row: f64, col: f64) -> [f64; 2] {
        [
            self.origin[0] + (col + 0.5) * self.resolution,
            self.origin[1] + (self.height as f64 - row - 0.5) * self.resolution,
        ]
    }
}

/// Which side intermediate and never-observed cells fall on when binarizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnknownPolicy {
    #[default]
    AsOccupied,
    AsFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub occupied: f64,
    pub free: f64,
    pub unknown_policy: UnknownPolicy,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            occupied: DEFAULT_OCCUPIED_THRESH,
            free: DEFAULT_FREE_THRESH,
            unknown_policy: UnknownPolicy::AsOccupied,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.free)
            && (0.0..=1.0).contains(&self.occupied)
            && self.free < self.occupied;
        if ok {
            Ok(())
        } else {
            Err(Error::Thresholds {
                free: self.free,
                occupied: self.occupied,
            })
        }
    }

    /// Classify one probability; `true` means occupied.
    #[inline]
    pub fn is_occupied(&self, p: f64, unknown: bool) -> bool {
        if !unknown {
            if p >= self.occupied {
                return true;
            }
            if p <= self.free {
                return false;
            }
        }
        self.unknown_policy == UnknownPolicy::AsOccupied
    }
}

/// Two-state grid: every cell is either occupied or free.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryGrid {
    width: usize,
    height: usize,
    occupied: Vec<bool>,
}

impl BinaryGrid {
    pub fn new(width: usize, height: usize, occupied: Vec<bool>) -> Self {
        assert_eq!(occupied.len(), width * height, "binary grid size mismatch");
        BinaryGrid {
            width,
            height,
            occupied,
        }
    }

    pub fn filled(width: usize, height: usize, occupied: bool) -> Self {
        BinaryGrid::new(width, height, vec![occupied; width * height])
    }

    /// Build from text rows, `#` occupied and anything else free.
    pub fn from_rows(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut occupied = Vec::with_capacity(width * height);
        for row in rows {
            assert_eq!(row.chars().count(), width, "ragged rows");
            occupied.extend(row.chars().map(|ch| ch == '#'));
        }
        BinaryGrid::new(width, height, occupied)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn occupied(&self) -> &[bool] {
        &self.occupied
    }

    #[inline]
    pub fn is_occupied(&self, cell: Cell) -> bool {
        self.occupied[cell.row * self.width + cell.col]
    }

    #[inline]
    pub fn is_free(&self, cell: Cell) -> bool {
        !self.is_occupied(cell)
    }

    #[inline]
    pub fn set(&mut self, cell: Cell, occupied: bool) {
        self.occupied[cell.row * self.width + cell.col] = occupied;
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.height && cell.col < self.width
    }

    pub fn free_count(&self) -> usize {
        self.occupied.iter().filter(|o| !**o).count()
    }
}

/// Threshold an occupancy grid into occupied/free.
pub fn binarize(grid: &OccupancyGrid, thresholds: &Thresholds) -> Result<BinaryGrid> {
    thresholds.validate()?;
    let occupied = grid
        .cells
        .iter()
        .zip(&grid.unknown)
        .map(|(p, u)| thresholds.is_occupied(*p, *u))
        .collect();
    Ok(BinaryGrid::new(grid.width, grid.height, occupied))
}

/// Resample to [`TARGET_RESOLUTION`]: bilinear for probabilities, nearest
/// neighbour for the unknown mask. The lower-left origin is kept.
pub fn normalize_resolution(grid: &OccupancyGrid) -> Result<OccupancyGrid> {
    if grid.resolution == TARGET_RESOLUTION {
        return Ok(grid.clone());
    }
    if grid.width < 2 || grid.height < 2 {
        return Err(Error::InvalidGrid(format!(
            "cannot resample degenerate {}x{} grid",
            grid.width, grid.height
        )));
    }
    let scale = grid.resolution / TARGET_RESOLUTION;
    let new_w = ((grid.width as f64 * scale).round() as usize).max(1);
    let new_h = ((grid.height as f64 * scale).round() as usize).max(1);
    let fx = grid.width as f64 / new_w as f64;
    let fy = grid.height as f64 / new_h as f64;
    let max_c = (grid.width - 1) as f64;
    let max_r = (grid.height - 1) as f64;

    let mut cells = Vec::with_capacity(new_w * new_h);
    let mut unknown = Vec::with_capacity(new_w * new_h);
    for r in 0..new_h {
        let sy = ((r as f64 + 0.5) * fy - 0.5).clamp(0.0, max_r);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(grid.height - 1);
        let ty = sy - y0 as f64;
        for c in 0..new_w {
            let sx = ((c as f64 + 0.5) * fx - 0.5).clamp(0.0, max_c);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(grid.width - 1);
            let tx = sx - x0 as f64;
            let at = |row: usize, col: usize| grid.cells[row * grid.width + col];
            let top = at(y0, x0) * (1.0 - tx) + at(y0, x1) * tx;
            let bottom = at(y1, x0) * (1.0 - tx) + at(y1, x1) * tx;
            cells.push((top * (1.0 - ty) + bottom * ty).clamp(0.0, 1.0));
            let nr = sy.round() as usize;
            let nc = sx.round() as usize;
            unknown.push(grid.unknown[nr * grid.width + nc]);
        }
    }
    OccupancyGrid::new(new_w, new_h, TARGET_RESOLUTION, grid.origin, cells, unknown)
}

/// A 64x64 window copied out of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    /// Top-left cell of the window in the parent grid.
    pub origin: Cell,
    /// Row-major occupancy probabilities.
    pub data: Vec<f64>,
}

impl Patch {
    pub const SIZE: usize = PATCH_SIZE;

    pub fn from_grid(grid: &OccupancyGrid, origin: Cell) -> Self {
        let mut data = Vec::with_capacity(PATCH_SIZE * PATCH_SIZE);
        for r in 0..PATCH_SIZE {
            let start = (origin.row + r) * grid.width + origin.col;
            data.extend_from_slice(&grid.cells[start..start + PATCH_SIZE]);
        }
        Patch { origin, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * PATCH_SIZE + c]
    }
}

/// Window start offsets along one axis: multiples of `stride`, plus a final
/// edge-aligned start when the stride does not land on the border.
pub fn window_starts(len: usize, stride: usize) -> Vec<usize> {
    if len < PATCH_SIZE {
        return Vec::new();
    }
    let last = len - PATCH_SIZE;
    let mut starts: Vec<usize> = (0..=last).step_by(stride).collect();
    if starts.last() != Some(&last) {
        starts.push(last);
    }
    starts
}

/// Window origins in row-major order.
pub fn window_origins(width: usize, height: usize, stride: usize) -> Result<Vec<Cell>> {
    if stride == 0 {
        return Err(Error::InvalidGrid("stride must be positive".into()));
    }
    if width < PATCH_SIZE || height < PATCH_SIZE {
        return Err(Error::GridTooSmall {
            width,
            height,
            window: PATCH_SIZE,
        });
    }
    let cols = window_starts(width, stride);
    Ok(window_starts(height, stride)
        .into_iter()
        .flat_map(|r| cols.iter().map(move |c| Cell::new(r, *c)))
        .collect())
}

/// All 64x64 windows of a normalized grid at the given stride.
pub fn sliding_windows(grid: &OccupancyGrid, stride: usize) -> Result<Vec<Patch>> {
    if (grid.resolution - TARGET_RESOLUTION).abs() > 1e-12 {
        return Err(Error::InvalidGrid(format!(
            "sliding windows need {TARGET_RESOLUTION} m/cell, grid has {}",
            grid.resolution
        )));
    }
    Ok(window_origins(grid.width, grid.height, stride)?
        .into_iter()
        .map(|o| Patch::from_grid(grid, o))
        .collect())
}
