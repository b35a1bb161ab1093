//! Deterministic doorway detector. A doorway shows up as two occupied wall
//! ends facing each other across a free gap of door width, with walls
//! continuing away from the gap and free space on both sides of it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::cells::{Cell, PatchMask, PATCH_SIZE};
use crate::geometry::{normalize_angle, Point, RotatedRect};
use crate::grid::{Patch, Thresholds};

const N: i64 = PATCH_SIZE as i64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineParams {
    pub thresholds: Thresholds,
    /// Accepted free gap between the wall ends, in cells.
    pub min_gap: f64,
    pub max_gap: f64,
    /// Minimum occupied run continuing each wall away from the gap.
    pub min_run: usize,
    /// Run length that earns the full run score.
    pub max_run: usize,
    /// Free cells required on each side of the gap midpoint.
    pub side_clearance: usize,
    /// Probe distance across a wall end; a wall end has free space this far
    /// out on at least one side, a continuing wall does not.
    pub jamb_probe: usize,
    /// Occupied 8-connected blobs smaller than this are ignored.
    pub speckle_size: usize,
    /// Pairs whose midpoints are this close describe the same doorway.
    pub merge_radius: f64,
    /// Free region required on each side of the gap: it must reach the
    /// window border or hold this many cells. Rejects chords that cut off
    /// a corner or the space behind furniture.
    pub min_side_area: usize,
    /// Radius of the neighbourhood behind each wall end whose occupied
    /// cells must be elongated along the crossing.
    pub jamb_radius: i64,
    /// Required ratio of the second moment along the crossing to the one
    /// across it, for the occupied cells behind each wall end.
    pub wall_alignment: f64,
    /// The alignment test is skipped when the wall leaves the window
    /// within this many cells behind the wall end.
    pub clip_distance: f64,
    /// Mean occupied width across the crossing just behind each wall end.
    /// Door leaves are thinner than walls.
    pub min_thickness: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            thresholds: Thresholds::default(),
            min_gap: 13.0,
            max_gap: 33.0,
            min_run: 11,
            max_run: 16,
            side_clearance: 3,
            jamb_probe: 7,
            speckle_size: 6,
            merge_radius: 6.0,
            min_side_area: 400,
            jamb_radius: 10,
            wall_alignment: 2.0,
            clip_distance: 6.0,
            min_thickness: 2.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Free,
    Occupied,
    /// Between the thresholds: unexplored or uncertain.
    Unknown,
    Outside,
}

struct Binary {
    state: Vec<State>,
}

impl Binary {
    fn from_patch(patch: &Patch, params: &BaselineParams) -> Self {
        let t = &params.thresholds;
        let mut occ: Vec<bool> = patch.data.iter().map(|p| *p >= t.occupied).collect();
        remove_speckles(&mut occ, params.speckle_size);
        let state = patch
            .data
            .iter()
            .zip(&occ)
            .map(|(p, o)| {
                if *o {
                    State::Occupied
                } else if *p <= t.free || *p >= t.occupied {
                    // removed speckles read as free
                    State::Free
                } else {
                    State::Unknown
                }
            })
            .collect();
        Binary { state }
    }

    #[inline]
    fn at(&self, (r, c): (i64, i64)) -> State {
        if r < 0 || c < 0 || r >= N || c >= N {
            State::Outside
        } else {
            self.state[(r * N + c) as usize]
        }
    }

    fn is_boundary(&self, r: i64, c: i64) -> bool {
        self.at((r, c)) == State::Occupied
            && [(-1, 0), (1, 0), (0, -1), (0, 1)]
                .iter()
                .any(|(dr, dc)| self.at((r + dr, c + dc)) == State::Free)
    }
}

fn remove_speckles(occ: &mut [bool], min_size: usize) {
    let n = PATCH_SIZE;
    let mut seen = vec![false; occ.len()];
    let mut queue = VecDeque::new();
    let mut blob = Vec::new();
    for start in 0..occ.len() {
        if !occ[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        blob.clear();
        while let Some(i) = queue.pop_front() {
            blob.push(i);
            let (r, c) = ((i / n) as i64, (i % n) as i64);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nr, nc) = (r + dr, c + dc);
                    if nr < 0 || nc < 0 || nr >= N || nc >= N {
                        continue;
                    }
                    let j = (nr * N + nc) as usize;
                    if occ[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        if blob.len() < min_size {
            for i in &blob {
                occ[*i] = false;
            }
        }
    }
}

#[inline]
fn offset(p: (i64, i64), v: (f64, f64), k: f64) -> (i64, i64) {
    // rounding half away from zero keeps offsets odd-symmetric, which makes
    // every probe invariant under transposition and 180 degree rotation
    (p.0 + (k * v.0).round() as i64, p.1 + (k * v.1).round() as i64)
}

#[derive(Debug, Clone, Copy)]
struct Gap {
    p1: (i64, i64),
    p2: (i64, i64),
    dist: f64,
    u: (f64, f64),
    n: (f64, f64),
    confidence: f64,
}

fn wall_run(b: &Binary, p: (i64, i64), dir: (f64, f64), max_run: usize) -> usize {
    let mut run = 0;
    let mut misses = 0;
    for k in 1..=max_run {
        // the wall may leave the window; that still counts as continuing
        match b.at(offset(p, dir, k as f64)) {
            State::Occupied | State::Outside => {
                run += 1;
                misses = 0;
            }
            _ => {
                misses += 1;
                if misses == 2 {
                    break;
                }
            }
        }
    }
    run
}

fn evaluate(b: &Binary, p1: (i64, i64), p2: (i64, i64), params: &BaselineParams) -> Option<Gap> {
    let d = ((p2.0 - p1.0) as f64, (p2.1 - p1.1) as f64);
    let dist = d.0.hypot(d.1);
    let width = dist - 1.0;
    if width < params.min_gap || width > params.max_gap {
        return None;
    }
    let u = (d.0 / dist, d.1 / dist);
    let minus_u = (-u.0, -u.1);
    let n = (u.1, -u.0);

    // free crossing, probed from both ends
    let mut k = 1.0;
    while k <= dist - 1.5 {
        if b.at(offset(p1, u, k)) != State::Free || b.at(offset(p2, minus_u, k)) != State::Free {
            return None;
        }
        k += 0.5;
    }

    // free space on both sides along the crossing
    let probes = [0.25 * dist, 0.5 * dist, 0.75 * dist];
    for m in probes.iter().flat_map(|k| [offset(p1, u, *k), offset(p2, minus_u, *k)]) {
        if b.at(m) != State::Free {
            return None;
        }
        for s in 1..=params.side_clearance {
            for sign in [1.0, -1.0] {
                if b.at(offset(m, n, sign * s as f64)) != State::Free {
                    return None;
                }
            }
        }
    }

    // walls continue away from the gap
    let run1 = wall_run(b, p1, minus_u, params.max_run);
    let run2 = wall_run(b, p2, u, params.max_run);
    if run1.min(run2) < params.min_run {
        return None;
    }

    // both ends are wall ends rather than the sides of a passage, and the
    // walls behind them are thin, with free space beside them
    let probe = params.jamb_probe as f64;
    let open_beside = |q: (i64, i64)| {
        [probe, probe + 1.0, -probe, -probe - 1.0]
            .iter()
            .any(|s| b.at(offset(q, n, *s)) == State::Free)
    };
    for (p, away) in [(p1, minus_u), (p2, u)] {
        if !open_beside(p) {
            return None;
        }
        for k in [4.0, 8.0] {
            let q = offset(p, away, k);
            if b.at(q) != State::Outside && !open_beside(q) {
                return None;
            }
        }
    }

    let th = params.min_thickness;
    if thickness(b, p1, minus_u, n) < th || thickness(b, p2, u, n) < th {
        return None;
    }

    let d_int = (p2.0 - p1.0, p2.1 - p1.1);
    if !wall_aligned(b, p1, (-d_int.0, -d_int.1), params)
        || !wall_aligned(b, p2, d_int, params)
    {
        return None;
    }

    for sign in [1.0, -1.0] {
        if !side_open(b, p1, p2, u, n, sign, params) {
            return None;
        }
    }

    let run_score = run1.min(run2).min(params.max_run) as f64 / params.max_run as f64;
    let center = 0.5 * (params.min_gap + params.max_gap);
    let spread = 0.5 * (params.max_gap - params.min_gap);
    let centrality = (1.0 - (width - center).abs() / spread).clamp(0.0, 1.0);
    Some(Gap {
        p1,
        p2,
        dist,
        u,
        n,
        confidence: 0.5 + 0.25 * run_score + 0.25 * centrality,
    })
}

/// Whether the occupied cells behind wall end `p` (in direction `away`)
/// are elongated along `away`, as a wall continuing from a doorway is.
/// Integer moments keep the test exact under the patch symmetries.
fn wall_aligned(b: &Binary, p: (i64, i64), away: (i64, i64), params: &BaselineParams) -> bool {
    let r = params.jamb_radius;
    let len = ((away.0 * away.0 + away.1 * away.1) as f64).sqrt();
    let dir = (away.0 as f64 / len, away.1 as f64 / len);
    if b.at(offset(p, dir, params.clip_distance)) == State::Outside {
        // too little wall inside the window to judge
        return true;
    }
    let (mut n, mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0i64, 0i64, 0i64, 0i64, 0i64, 0i64);
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy > r * r || dy * away.0 + dx * away.1 < 0 {
                continue;
            }
            if b.at((p.0 + dy, p.1 + dx)) != State::Occupied {
                continue;
            }
            n += 1;
            sx += dx;
            sy += dy;
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
    }
    // covariance scaled by n^2, with (row, col) = (y, x)
    let cxx = n * sxx - sx * sx;
    let cyy = n * syy - sy * sy;
    let cxy = n * sxy - sx * sy;
    let (ay, ax) = away;
    let along = ax * ax * cxx + 2 * ax * ay * cxy + ay * ay * cyy;
    let across = ay * ay * cxx - 2 * ax * ay * cxy + ax * ax * cyy;
    n > 0 && along as f64 >= params.wall_alignment * across as f64
}

/// Mean count of occupied cells across `n` at depths 2 to 6 behind `p`.
/// Depths outside the window are left out; with none left the wall is
/// taken as thick.
fn thickness(b: &Binary, p: (i64, i64), away: (f64, f64), n: (f64, f64)) -> f64 {
    let (mut sum, mut depths) = (0usize, 0usize);
    for k in 2..=6 {
        let q = offset(p, away, k as f64);
        if b.at(q) == State::Outside {
            continue;
        }
        depths += 1;
        sum += (-3..=3)
            .filter(|s| b.at(offset(q, n, *s as f64)) == State::Occupied)
            .count();
    }
    if depths == 0 {
        return f64::INFINITY;
    }
    sum as f64 / depths as f64
}

/// Whether the free region on one side of the gap is large or leaves the
/// window. Cells within one cell of the crossing are walls for the search.
fn side_open(
    b: &Binary,
    p1: (i64, i64),
    p2: (i64, i64),
    u: (f64, f64),
    n: (f64, f64),
    sign: f64,
    params: &BaselineParams,
) -> bool {
    let dist = ((p2.0 - p1.0) as f64).hypot((p2.1 - p1.1) as f64);
    let on_crossing = |q: (i64, i64)| {
        let d = ((q.0 - p1.0) as f64, (q.1 - p1.1) as f64);
        let along = d.0 * u.0 + d.1 * u.1;
        let across = d.0 * n.0 + d.1 * n.1;
        (0.0..=dist).contains(&along) && across.abs() <= 1.0
    };
    // seeded from both ends so the search does not depend on pair order
    let mut seen = vec![false; PATCH_SIZE * PATCH_SIZE];
    let mut queue = VecDeque::new();
    let side = sign * params.side_clearance as f64;
    for mid in [offset(p1, u, 0.5 * dist), offset(p2, (-u.0, -u.1), 0.5 * dist)] {
        let seed = offset(mid, n, side);
        if b.at(seed) != State::Free || on_crossing(seed) {
            return false;
        }
        let i = (seed.0 * N + seed.1) as usize;
        if !seen[i] {
            seen[i] = true;
            queue.push_back(seed);
        }
    }
    let mut count = 0;
    while let Some(q) = queue.pop_front() {
        count += 1;
        if count >= params.min_side_area {
            return true;
        }
        for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
            let next = (q.0 + dr, q.1 + dc);
            match b.at(next) {
                State::Outside => return true,
                State::Free => {
                    let i = (next.0 * N + next.1) as usize;
                    if !seen[i] && !on_crossing(next) {
                        seen[i] = true;
                        queue.push_back(next);
                    }
                }
                _ => {}
            }
        }
    }
    false
}

fn find_gaps(b: &Binary, params: &BaselineParams) -> Vec<Gap> {
    let mut boundary = Vec::new();
    for r in 0..N {
        for c in 0..N {
            if b.is_boundary(r, c) {
                boundary.push((r, c));
            }
        }
    }
    let lo = (params.min_gap + 1.0).powi(2);
    let hi = (params.max_gap + 1.0).powi(2);
    let mut gaps = Vec::new();
    for (i, &p1) in boundary.iter().enumerate() {
        for &p2 in &boundary[i + 1..] {
            let dr = p2.0 - p1.0;
            if (dr * dr) as f64 > hi {
                break;
            }
            let dc = p2.1 - p1.1;
            let d2 = (dr * dr + dc * dc) as f64;
            if d2 < lo || d2 > hi {
                continue;
            }
            if let Some(g) = evaluate(b, p1, p2, params) {
                gaps.push(g);
            }
        }
    }
    gaps
}

/// Cells on each side of the crossing, along `n`, that are occupied at
/// both wall ends.
fn shared_extent(b: &Binary, p1: (i64, i64), p2: (i64, i64), n: (f64, f64)) -> (f64, f64) {
    let extent = |sign: f64| {
        let mut s = 0;
        while s < 8 {
            let next = sign * (s + 1) as f64;
            if b.at(offset(p1, n, next)) != State::Occupied
                || b.at(offset(p2, n, next)) != State::Occupied
            {
                break;
            }
            s += 1;
        }
        s as f64
    };
    (extent(1.0), extent(-1.0))
}

/// Rectangle spanning the gap between the two wall ends at the thickness
/// both ends share.
fn gap_rect(b: &Binary, g: &Gap) -> RotatedRect {
    let (plus, minus) = shared_extent(b, g.p1, g.p2, g.n);
    let shift = 0.5 * (plus - minus);
    let mid = (
        0.5 * (g.p1.0 + g.p2.0) as f64 + shift * g.n.0,
        0.5 * (g.p1.1 + g.p2.1) as f64 + shift * g.n.1,
    );
    RotatedRect {
        center: Point::new(mid.1, mid.0),
        angle: normalize_angle(g.u.0.atan2(g.u.1)),
        half_length: 0.5 * (g.dist - 1.0),
        half_width: 0.5 * (plus + minus + 1.0),
    }
}

/// Door confidence and mask for one patch. Confidence is 0 when no gap
/// qualifies; otherwise it grows with wall run length and with how close
/// the gap width is to the middle of the door width range.
pub fn baseline_detect(patch: &Patch, params: &BaselineParams) -> (f64, Option<PatchMask>) {
    let b = Binary::from_patch(patch, params);
    let mut gaps = find_gaps(&b, params);
    if gaps.is_empty() {
        return (0.0, None);
    }
    let confidence = gaps.iter().map(|g| g.confidence).fold(0.0, f64::max);

    // shortest crossing first: it is the one perpendicular to the walls
    gaps.sort_by(|a, b| a.dist.total_cmp(&b.dist).then(a.p1.cmp(&b.p1)).then(a.p2.cmp(&b.p2)));
    let midpoint = |g: &Gap| {
        (
            0.5 * (g.p1.0 + g.p2.0) as f64,
            0.5 * (g.p1.1 + g.p2.1) as f64,
        )
    };
    let mut reps: Vec<Gap> = Vec::new();
    for g in gaps {
        let m = midpoint(&g);
        let near = reps.iter().any(|r| {
            let q = midpoint(r);
            (m.0 - q.0).hypot(m.1 - q.1) <= params.merge_radius
        });
        if !near {
            reps.push(g);
        }
    }
    let mut mask = PatchMask::empty();
    for g in &reps {
        for cell in gap_rect(&b, g).raster(PATCH_SIZE, PATCH_SIZE).iter() {
            let Cell { row, col } = cell;
            mask.set(row, col, true);
        }
    }
    let mask = (!mask.is_empty()).then_some(mask);
    (confidence, mask)
}
