//! Grid cells, cell sets and binary patch masks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length of a sliding-window patch, in cells.
pub const PATCH_SIZE: usize = 64;

/// A grid cell addressed as (row, col), row 0 at the top of the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    /// Cell center in continuous (x = col, y = row) coordinates.
    pub fn center(self) -> crate::geometry::Point {
        crate::geometry::Point::new(self.col as f64, self.row as f64)
    }

    /// 4-neighbours that lie inside a `width` x `height` grid.
    pub fn neighbors4(self, width: usize, height: usize) -> impl Iterator<Item = Cell> {
        let Cell { row, col } = self;
        let up = (row > 0).then(|| Cell::new(row - 1, col));
        let down = (row + 1 < height).then(|| Cell::new(row + 1, col));
        let left = (col > 0).then(|| Cell::new(row, col - 1));
        let right = (col + 1 < width).then(|| Cell::new(row, col + 1));
        [up, left, right, down].into_iter().flatten()
    }
}

/// Inclusive bounding box of a cell set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub min_row: usize,
    pub min_col: usize,
    pub max_row: usize,
    pub max_col: usize,
}

impl Bounds {
    pub fn height(&self) -> usize {
        self.max_row - self.min_row + 1
    }

    pub fn width(&self) -> usize {
        self.max_col - self.min_col + 1
    }
}

/// Sorted, duplicate-free set of map cells.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CellSet {
    cells: Vec<Cell>,
}

impl CellSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Cell> + '_ {
        self.cells.iter().copied()
    }

    pub fn as_slice(&self) -> &[Cell] {
        &self.cells
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.cells.len() && j < other.cells.len() {
            let (a, b) = (self.cells[i], other.cells[j]);
            match a.cmp(&b) {
                std::cmp::Ordering::Less => {
                    out.push(a);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.cells[i..]);
        out.extend_from_slice(&other.cells[j..]);
        CellSet { cells: out }
    }

    pub fn intersection_len(&self, other: &CellSet) -> usize {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().filter(|c| large.contains(*c)).count()
    }

    pub fn intersects(&self, other: &CellSet) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().any(|c| large.contains(c))
    }

    pub fn bounds(&self) -> Option<Bounds> {
        let first = self.cells.first()?;
        let last = self.cells.last()?;
        let (min_col, max_col) = self
            .cells
            .iter()
            .fold((usize::MAX, 0), |(lo, hi), c| (lo.min(c.col), hi.max(c.col)));
        Some(Bounds {
            min_row: first.row,
            min_col,
            max_row: last.row,
            max_col,
        })
    }

    /// Cells of `self` that are not in `other`.
    pub fn difference(&self, other: &CellSet) -> CellSet {
        self.iter().filter(|c| !other.contains(*c)).collect()
    }

    /// Mean cell center as (row, col).
    pub fn centroid(&self) -> Option<(f64, f64)> {
        if self.is_empty() {
            return None;
        }
        let n = self.len() as f64;
        let (sr, sc) = self
            .cells
            .iter()
            .fold((0.0, 0.0), |(r, c), cell| (r + cell.row as f64, c + cell.col as f64));
        Some((sr / n, sc / n))
    }

    /// Rasterize into a local bitmap covering the bounding box.
    pub fn to_local(&self) -> Option<LocalMask> {
        let b = self.bounds()?;
        let mut local = LocalMask::new(b.min_row, b.min_col, b.width(), b.height());
        for c in self.iter() {
            local.set(c.row - b.min_row, c.col - b.min_col, true);
        }
        Some(local)
    }

    /// Bounding-box relative run-length document.
    pub fn to_rle(&self) -> CellSetRle {
        match self.to_local() {
            None => CellSetRle {
                origin: [0, 0],
                size: [0, 0],
                rle: Vec::new(),
            },
            Some(local) => CellSetRle {
                origin: [local.row0, local.col0],
                size: [local.height, local.width],
                rle: rle_encode(local.bits.iter().copied()),
            },
        }
    }

    pub fn from_rle(doc: &CellSetRle) -> Result<CellSet> {
        let [height, width] = doc.size;
        let bits = rle_decode(&doc.rle, width * height)?;
        let local = LocalMask {
            row0: doc.origin[0],
            col0: doc.origin[1],
            width,
            height,
            bits,
        };
        Ok(local.to_cells())
    }
}

impl FromIterator<Cell> for CellSet {
    fn from_iter<I: IntoIterator<Item = Cell>>(iter: I) -> Self {
        let mut cells: Vec<Cell> = iter.into_iter().collect();
        cells.sort_unstable();
        cells.dedup();
        CellSet { cells }
    }
}

impl<'a> IntoIterator for &'a CellSet {
    type Item = Cell;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, Cell>>;

    fn into_iter(self) -> Self::IntoIter {
        self.cells.iter().copied()
    }
}

/// Serialized form of a [`CellSet`]: bounding box plus row-major run lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSetRle {
    /// (row, col) of the bounding box's top-left cell.
    pub origin: [usize; 2],
    /// (height, width) of the bounding box.
    pub size: [usize; 2],
    pub rle: Vec<u32>,
}

/// Dense boolean bitmap anchored at a map position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalMask {
    pub row0: usize,
    pub col0: usize,
    pub width: usize,
    pub height: usize,
    pub bits: Vec<bool>,
}

impl LocalMask {
    pub fn new(row0: usize, col0: usize, width: usize, height: usize) -> Self {
        LocalMask {
            row0,
            col0,
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.width + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.bits[r * self.width + c] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn to_cells(&self) -> CellSet {
        let mut cells = Vec::with_capacity(self.count());
        for r in 0..self.height {
            for c in 0..self.width {
                if self.get(r, c) {
                    cells.push(Cell::new(self.row0 + r, self.col0 + c));
                }
            }
        }
        // row-major scan is already sorted
        CellSet { cells }
    }
}

/// Binary doorway mask of one 64x64 patch, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatchMask {
    bits: Vec<bool>,
}

impl Default for PatchMask {
    fn default() -> Self {
        Self::empty()
    }
}

impl PatchMask {
    pub fn empty() -> Self {
        PatchMask {
            bits: vec![false; PATCH_SIZE * PATCH_SIZE],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        if bits.len() != PATCH_SIZE * PATCH_SIZE {
            return Err(Error::Mask(format!(
                "patch mask needs {} cells, got {}",
                PATCH_SIZE * PATCH_SIZE,
                bits.len()
            )));
        }
        Ok(PatchMask { bits })
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * PATCH_SIZE + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.bits[r * PATCH_SIZE + c] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Mask cells translated into map coordinates.
    pub fn to_map_cells(&self, origin: Cell) -> CellSet {
        let mut cells = Vec::with_capacity(self.count());
        for r in 0..PATCH_SIZE {
            for c in 0..PATCH_SIZE {
                if self.get(r, c) {
                    cells.push(Cell::new(origin.row + r, origin.col + c));
                }
            }
        }
        CellSet { cells }
    }

    /// Restrict a map-coordinate cell set to the window at `origin`.
    pub fn from_map_cells(cells: &CellSet, origin: Cell) -> Self {
        let mut mask = PatchMask::empty();
        for c in cells.iter() {
            if c.row >= origin.row
                && c.col >= origin.col
                && c.row < origin.row + PATCH_SIZE
                && c.col < origin.col + PATCH_SIZE
            {
                mask.set(c.row - origin.row, c.col - origin.col, true);
            }
        }
        mask
    }

    pub fn to_rle(&self) -> Vec<u32> {
        rle_encode(self.bits.iter().copied())
    }

    pub fn from_rle(runs: &[u32]) -> Result<Self> {
        PatchMask::from_bits(rle_decode(runs, PATCH_SIZE * PATCH_SIZE)?)
    }
}

/// Alternating run lengths over a row-major bit stream, starting with a run
/// of `false` (possibly zero long).
pub fn rle_encode(bits: impl IntoIterator<Item = bool>) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut len = 0u32;
    for b in bits {
        if b == current {
            len += 1;
        } else {
            runs.push(len);
            current = b;
            len = 1;
        }
    }
    if len > 0 || runs.is_empty() {
        runs.push(len);
    }
    runs
}

pub fn rle_decode(runs: &[u32], expected: usize) -> Result<Vec<bool>> {
    let total: u64 = runs.iter().map(|r| *r as u64).sum();
    if total != expected as u64 {
        return Err(Error::Mask(format!(
            "run lengths sum to {total}, expected {expected}"
        )));
    }
    let mut bits = Vec::with_capacity(expected);
    let mut value = false;
    for run in runs {
        bits.extend(std::iter::repeat_n(value, *run as usize));
        value = !value;
    }
    Ok(bits)
}
