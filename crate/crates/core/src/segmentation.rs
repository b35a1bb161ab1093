//! Free-space segmentation: connected components via union-find, and
//! Felzenszwalb-Huttenlocher graph-based region merging.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cells::{Cell, CellSet};
use crate::cluster::DoorHypothesis;
use crate::error::{Error, Result};
use crate::grid::BinaryGrid;

/// Disjoint-set forest with union by size and path halving.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merge the sets of `a` and `b`; returns the new root.
    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        big
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

/// Per-cell instance labels: 0 for non-free cells, 1..=K for segments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegmentLabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: u32,
}

impl SegmentLabelMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Number of segments K.
    pub fn count(&self) -> u32 {
        self.count
    }

    #[inline]
    pub fn label(&self, cell: Cell) -> u32 {
        self.labels[cell.row * self.width + cell.col]
    }

    /// Cell count of each segment; index 0 is the background.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.count as usize + 1];
        for l in &self.labels {
            sizes[*l as usize] += 1;
        }
        sizes
    }

    /// Cells of every segment, indexed by `id - 1`.
    pub fn segment_cells(&self) -> Vec<CellSet> {
        let mut per: Vec<Vec<Cell>> = vec![Vec::new(); self.count as usize];
        for (i, l) in self.labels.iter().enumerate() {
            if *l > 0 {
                per[*l as usize - 1].push(Cell::new(i / self.width, i % self.width));
            }
        }
        per.into_iter().map(|v| v.into_iter().collect()).collect()
    }

    /// Relabel arbitrary region ids into 1..=K in first-encounter scan
    /// order, dropping regions smaller than `min_size`.
    fn from_regions(
        width: usize,
        height: usize,
        regions: &[usize],
        keep: impl Fn(usize) -> bool,
        region_size: impl Fn(usize) -> usize,
        min_size: usize,
    ) -> Self {
        let mut map = std::collections::HashMap::new();
        let mut labels = vec![0u32; width * height];
        let mut count = 0u32;
        for (i, r) in regions.iter().enumerate() {
            if !keep(i) || region_size(*r) < min_size {
                continue;
            }
            let id = *map.entry(*r).or_insert_with(|| {
                count += 1;
                count
            });
            labels[i] = id;
        }
        SegmentLabelMap {
            width,
            height,
            labels,
            count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum SegmentMethod {
    /// 4-connected components of free cells.
    Components,
    /// Graph-based region merging on the 0..255 occupancy image.
    Graph {
        /// Scale parameter of the merge threshold `k / |C|`.
        k: f64,
        /// Edges heavier than this never merge, which makes the method
        /// reduce to connected components on binary input.
        cut_weight: f64,
    },
}

impl SegmentMethod {
    pub fn graph_default() -> Self {
        SegmentMethod::Graph {
            k: 100.0,
            cut_weight: 128.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentParams {
    pub method: SegmentMethod,
    /// Segments with fewer cells are discarded as speckle.
    pub min_size: usize,
}

impl Default for SegmentParams {
    fn default() -> Self {
        SegmentParams {
            method: SegmentMethod::Components,
            min_size: 25,
        }
    }
}

fn components_regions(b: &BinaryGrid) -> DisjointSet {
    let (w, h) = (b.width(), b.height());
    let occ = b.occupied();
    let mut ds = DisjointSet::new(w * h);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if occ[i] {
                continue;
            }
            if c + 1 < w && !occ[i + 1] {
                ds.union(i, i + 1);
            }
            if r + 1 < h && !occ[i + w] {
                ds.union(i, i + w);
            }
        }
    }
    ds
}

/// Graph-based segmentation of a row-major intensity image on 4-neighbour
/// edges weighted by absolute intensity difference. Returns the region
/// forest; query with [`DisjointSet::find`].
pub fn felzenszwalb(
    values: &[f64],
    width: usize,
    height: usize,
    k: f64,
    cut_weight: f64,
) -> DisjointSet {
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(2 * width * height);
    for r in 0..height {
        for c in 0..width {
            let i = r * width + c;
            if c + 1 < width {
                edges.push(((values[i] - values[i + 1]).abs(), i, i + 1));
            }
            if r + 1 < height {
                edges.push(((values[i] - values[i + width]).abs(), i, i + width));
            }
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut ds = DisjointSet::new(width * height);
    // internal difference: largest MST edge inside each component
    let mut internal = vec![0.0f64; width * height];
    for (w, a, b) in edges {
        if w > cut_weight {
            break;
        }
        let (ra, rb) = (ds.find(a), ds.find(b));
        if ra == rb {
            continue;
        }
        let ta = internal[ra] + k / ds.size[ra] as f64;
        let tb = internal[rb] + k / ds.size[rb] as f64;
        if w <= ta.min(tb) {
            let root = ds.union(ra, rb);
            internal[root] = internal[ra].max(internal[rb]).max(w);
        }
    }
    ds
}

/// Segment the free space of a binary grid.
pub fn segment(b: &BinaryGrid, params: &SegmentParams) -> SegmentLabelMap {
    let (w, h) = (b.width(), b.height());
    let occ = b.occupied();
    let mut ds = match params.method {
        SegmentMethod::Components => components_regions(b),
        SegmentMethod::Graph { k, cut_weight } => {
            let values: Vec<f64> = occ.iter().map(|o| if *o { 255.0 } else { 0.0 }).collect();
            felzenszwalb(&values, w, h, k, cut_weight)
        }
    };
    let regions: Vec<usize> = (0..w * h).map(|i| ds.find(i)).collect();
    let sizes: Vec<usize> = {
        let mut s = vec![0usize; w * h];
        for r in &regions {
            s[*r] += 1;
        }
        s
    };
    SegmentLabelMap::from_regions(
        w,
        h,
        &regions,
        |i| !occ[i],
        |r| sizes[r],
        params.min_size,
    )
}

/// Number of free-space segments K.
pub fn count_segments(b: &BinaryGrid, params: &SegmentParams) -> u32 {
    segment(b, params).count()
}

/// Mark every hypothesis not in `open_ids` as occupied and every hypothesis
/// in `open_ids` as free.
pub fn close_doors(
    b: &BinaryGrid,
    hyps: &[DoorHypothesis],
    open_ids: &BTreeSet<usize>,
) -> Result<BinaryGrid> {
    close_doors_sealed(b, hyps, open_ids, 0)
}

/// [`close_doors`] with closed regions grown by `seal_margin` cells
/// (Chebyshev) so rasterization slivers at door jambs cannot leak.
pub fn close_doors_sealed(
    b: &BinaryGrid,
    hyps: &[DoorHypothesis],
    open_ids: &BTreeSet<usize>,
    seal_margin: usize,
) -> Result<BinaryGrid> {
    for id in open_ids {
        if !hyps.iter().any(|h| h.id == *id) {
            return Err(Error::UnknownHypothesis(*id));
        }
    }
    let mut out = b.clone();
    for h in hyps.iter().filter(|h| !open_ids.contains(&h.id)) {
        for cell in h.region.iter() {
            if !out.contains(cell) {
                continue;
            }
            let (r0, c0) = (cell.row.saturating_sub(seal_margin), cell.col.saturating_sub(seal_margin));
            let r1 = (cell.row + seal_margin).min(out.height() - 1);
            let c1 = (cell.col + seal_margin).min(out.width() - 1);
            for r in r0..=r1 {
                for c in c0..=c1 {
                    out.set(Cell::new(r, c), true);
                }
            }
        }
    }
    for h in hyps.iter().filter(|h| open_ids.contains(&h.id)) {
        for cell in h.region.iter() {
            if out.contains(cell) {
                out.set(cell, false);
            }
        }
    }
    Ok(out)
}
