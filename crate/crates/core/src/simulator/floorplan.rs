//! Procedural floorplans: one central corridor with rooms packed along both
//! long sides, doors with open leaves, furniture, and a global rotation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cells::{Cell, CellSet};
use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Point, RotatedRect};
use crate::grid::{OccupancyGrid, DEFAULT_UNKNOWN_PIXEL, TARGET_RESOLUTION};

/// Closed interval used for every sampled quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub min: T,
    pub max: T,
}

impl<T: PartialOrd + Copy> Interval<T> {
    pub const fn new(min: T, max: T) -> Self {
        Interval { min, max }
    }

    pub fn is_ordered(&self) -> bool {
        self.min <= self.max
    }
}

impl Interval<f64> {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.min == self.max {
            self.min
        } else {
            rng.random_range(self.min..=self.max)
        }
    }
}

impl Interval<usize> {
    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.random_range(self.min..=self.max)
    }
}

/// Cells kept between a door and any wall junction or neighbouring door.
pub const JUNCTION_CLEARANCE: usize = 12;
/// Cells kept between furniture and walls, other furniture and door swings.
pub const FURNITURE_CLEARANCE: f64 = 8.0;
const EXTERIOR_MARGIN: usize = 4;
const LEAF_HALF_THICKNESS: f64 = 0.75;

/// Metric sizes are in meters, angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FloorplanSpec {
    pub seed: u64,
    pub corridor_width: Interval<f64>,
    pub room_count: Interval<usize>,
    /// Room extent along the corridor.
    pub room_width: Interval<f64>,
    /// Room extent away from the corridor.
    pub room_depth: Interval<f64>,
    pub doors_per_room: Interval<usize>,
    pub door_width: Interval<f64>,
    /// Leaf opening angle; 90 is fully open against the wall normal.
    pub leaf_angle: Interval<f64>,
    pub furniture_per_room: Interval<usize>,
    pub rotation: Interval<f64>,
    pub wall_thickness: f64,
}

impl Default for FloorplanSpec {
    fn default() -> Self {
        FloorplanSpec {
            seed: 0,
            corridor_width: Interval::new(1.5, 2.5),
            room_count: Interval::new(4, 8),
            room_width: Interval::new(3.0, 5.5),
            room_depth: Interval::new(3.0, 5.0),
            doors_per_room: Interval::new(1, 2),
            door_width: Interval::new(0.7, 1.6),
            leaf_angle: Interval::new(30.0, 90.0),
            furniture_per_room: Interval::new(0, 3),
            rotation: Interval::new(0.0, 360.0),
            wall_thickness: 0.2,
        }
    }
}

fn cells_of(meters: f64) -> usize {
    (meters / TARGET_RESOLUTION).round() as usize
}

impl FloorplanSpec {
    pub fn with_seed(seed: u64) -> Self {
        FloorplanSpec {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleSpec(msg));
        let float_intervals = [
            ("corridor width", self.corridor_width),
            ("room width", self.room_width),
            ("room depth", self.room_depth),
            ("door width", self.door_width),
            ("leaf angle", self.leaf_angle),
            ("rotation", self.rotation),
        ];
        for (name, iv) in float_intervals {
            if !iv.min.is_finite() || !iv.max.is_finite() || !iv.is_ordered() {
                return bad(format!("{name} interval [{}, {}] is not ordered", iv.min, iv.max));
            }
        }
        for (name, iv) in [
            ("room count", self.room_count),
            ("doors per room", self.doors_per_room),
            ("furniture per room", self.furniture_per_room),
        ] {
            if !iv.is_ordered() {
                return bad(format!("{name} interval [{}, {}] is not ordered", iv.min, iv.max));
            }
        }
        let t = cells_of(self.wall_thickness);
        if t == 0 {
            return bad(format!("wall thickness {} m is below one cell", self.wall_thickness));
        }
        if self.room_count.min == 0 {
            return bad("room count must be at least 1".into());
        }
        if self.doors_per_room.min == 0 {
            return bad("every room needs at least one door".into());
        }
        if cells_of(self.door_width.min) == 0 {
            return bad("door width is below one cell".into());
        }
        if !(0.0..=90.0).contains(&self.leaf_angle.min) || !(0.0..=90.0).contains(&self.leaf_angle.max) {
            return bad("leaf angle must lie in [0, 90] degrees".into());
        }
        let smallest_room = cells_of(self.room_width.min).min(cells_of(self.room_depth.min));
        if smallest_room < 2 * t {
            return bad(format!(
                "rooms of {smallest_room} cells are below twice the wall thickness ({t} cells)"
            ));
        }
        let door_span = cells_of(self.door_width.max) + 2 * JUNCTION_CLEARANCE;
        if cells_of(self.room_width.min) < door_span {
            return bad(format!(
                "rooms of {} cells cannot hold a {} cell door with junction clearance",
                cells_of(self.room_width.min),
                cells_of(self.door_width.max)
            ));
        }
        if cells_of(self.corridor_width.min) < 2 * t {
            return bad("corridor is narrower than twice the wall thickness".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum CellClass {
    Exterior = 0,
    Wall = 1,
    Room = 2,
    Corridor = 3,
    Door = 4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    Room,
    Corridor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: u32,
    pub kind: InstanceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoorAnnotation {
    pub id: usize,
    pub mbr: RotatedRect,
    /// MBR corners as (row, col).
    pub corners: [[f64; 2]; 4],
    /// Instance ids of the two spaces the door joins, ascending.
    pub connects: [u32; 2],
    #[serde(skip)]
    pub cells: CellSet,
}

impl DoorAnnotation {
    fn new(id: usize, mbr: RotatedRect, connects: [u32; 2], width: usize, height: usize) -> Self {
        DoorAnnotation {
            id,
            corners: mbr.corners().map(|p| [p.y, p.x]),
            connects,
            cells: mbr.raster(width, height),
            mbr,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub width: usize,
    pub height: usize,
    pub rotation_deg: f64,
    pub doors: Vec<DoorAnnotation>,
    pub instances: Vec<Instance>,
    pub classes: Vec<CellClass>,
    /// Per-cell instance id, 0 outside rooms and corridors.
    pub instance_map: Vec<u32>,
}

/// Serializable ground truth without the per-cell rasters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthDocument {
    pub version: u32,
    pub width: usize,
    pub height: usize,
    pub rotation_deg: f64,
    pub doors: Vec<DoorAnnotation>,
    pub instances: Vec<Instance>,
}

pub const GROUND_TRUTH_FORMAT_VERSION: u32 = 1;

impl GroundTruth {
    pub fn to_document(&self) -> GroundTruthDocument {
        GroundTruthDocument {
            version: GROUND_TRUTH_FORMAT_VERSION,
            width: self.width,
            height: self.height,
            rotation_deg: self.rotation_deg,
            doors: self.doors.clone(),
            instances: self.instances.clone(),
        }
    }

    pub fn room_count(&self) -> usize {
        self.instances.iter().filter(|i| i.kind == InstanceKind::Room).count()
    }

    pub fn corridor_ids(&self) -> Vec<u32> {
        self.instances
            .iter()
            .filter(|i| i.kind == InstanceKind::Corridor)
            .map(|i| i.id)
            .collect()
    }
}

impl GroundTruthDocument {
    /// Door annotations with cells restored from their rectangles.
    pub fn doors_with_cells(&self) -> Result<Vec<DoorAnnotation>> {
        if self.version != GROUND_TRUTH_FORMAT_VERSION {
            return Err(Error::Metadata(format!(
                "unsupported ground truth version {}",
                self.version
            )));
        }
        Ok(self
            .doors
            .iter()
            .map(|d| DoorAnnotation::new(d.id, d.mbr, d.connects, self.width, self.height))
            .collect())
    }
}

/// Probability stored for never-observed cells (the unknown pixel value).
pub fn unknown_probability() -> f64 {
    (255.0 - DEFAULT_UNKNOWN_PIXEL as f64) / 255.0
}

#[derive(Debug, Clone, Copy)]
struct IRect {
    r0: usize,
    c0: usize,
    h: usize,
    w: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Top,
    Bottom,
}

#[derive(Debug, Clone, Copy)]
struct RoomPlan {
    id: u32,
    side: Side,
    interior: IRect,
}

/// A door in the unrotated layout.
#[derive(Debug, Clone, Copy)]
struct DoorPlan {
    rect: RotatedRect,
    hinge: Point,
    /// Unit vector from the hinge across the opening.
    across: Point,
    /// Unit vector from the hinge into the room that holds the leaf.
    into_room: Point,
    width: f64,
    leaf_room: u32,
    connects: [u32; 2],
    /// Wall identity and span along it, for spacing doors on one wall.
    wall: (u32, u32),
    span: (f64, f64),
}

struct Canvas {
    width: usize,
    height: usize,
    class: Vec<CellClass>,
    instance: Vec<u32>,
    obstacle: Vec<bool>,
}

impl Canvas {
    fn new(width: usize, height: usize) -> Self {
        Canvas {
            width,
            height,
            class: vec![CellClass::Exterior; width * height],
            instance: vec![0; width * height],
            obstacle: vec![false; width * height],
        }
    }

    fn fill(&mut self, r: IRect, class: CellClass, id: u32, only_exterior: bool) {
        for row in r.r0..r.r0 + r.h {
            for col in r.c0..r.c0 + r.w {
                let i = row * self.width + col;
                if only_exterior && self.class[i] != CellClass::Exterior {
                    continue;
                }
                self.class[i] = class;
                self.instance[i] = id;
            }
        }
    }
}

fn grow(r: IRect, t: usize) -> IRect {
    IRect {
        r0: r.r0 - t,
        c0: r.c0 - t,
        h: r.h + 2 * t,
        w: r.w + 2 * t,
    }
}

fn swing_radius(d: &DoorPlan) -> f64 {
    d.width + 2.0
}

/// Generate a map and its annotations. Deterministic in `spec`.
pub fn generate_floorplan(spec: &FloorplanSpec) -> Result<(OccupancyGrid, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let t = cells_of(spec.wall_thickness);
    let m = EXTERIOR_MARGIN;

    let room_count = spec.room_count.sample(&mut rng);
    let n_top = if rng.random_bool(0.5) {
        room_count.div_ceil(2)
    } else {
        room_count / 2
    };
    let sizes: Vec<(usize, usize)> = (0..room_count)
        .map(|_| {
            (
                cells_of(spec.room_width.sample(&mut rng)),
                cells_of(spec.room_depth.sample(&mut rng)),
            )
        })
        .collect();
    let corridor_w = cells_of(spec.corridor_width.sample(&mut rng));

    let (top, bottom) = sizes.split_at(n_top);
    let side_len = |rooms: &[(usize, usize)]| t + rooms.iter().map(|(w, _)| w + t).sum::<usize>();
    let total_len = side_len(top).max(side_len(bottom));
    let depth_top = top.iter().map(|r| r.1).max().unwrap_or(0);
    let depth_bottom = bottom.iter().map(|r| r.1).max().unwrap_or(0);
    let yc = m + t + if top.is_empty() { 0 } else { depth_top + t };
    let width0 = 2 * m + total_len;
    let height0 = yc + corridor_w + t + if bottom.is_empty() { 0 } else { depth_bottom + t } + m;

    let corridor = IRect {
        r0: yc,
        c0: m + t,
        h: corridor_w,
        w: total_len - 2 * t,
    };
    let mut rooms = Vec::with_capacity(room_count);
    let mut next_id = 2u32;
    for (side, list) in [(Side::Top, top), (Side::Bottom, bottom)] {
        let mut x = m + t;
        for (w, d) in list {
            let r0 = match side {
                Side::Top => yc - t - d,
                Side::Bottom => yc + corridor_w + t,
            };
            rooms.push(RoomPlan {
                id: next_id,
                side,
                interior: IRect { r0, c0: x, h: *d, w: *w },
            });
            next_id += 1;
            x += w + t;
        }
    }

    let mut canvas = Canvas::new(width0, height0);
    canvas.fill(grow(corridor, t), CellClass::Wall, 0, true);
    for r in &rooms {
        canvas.fill(grow(r.interior, t), CellClass::Wall, 0, true);
    }
    canvas.fill(corridor, CellClass::Corridor, 1, false);
    for r in &rooms {
        canvas.fill(r.interior, CellClass::Room, r.id, false);
    }

    let doors = place_doors(spec, &mut rng, &rooms, t, yc, corridor_w)?;
    for d in &doors {
        // carve the doorway
        let b = d.rect.raster(width0, height0);
        for c in b.iter() {
            let i = c.row * width0 + c.col;
            canvas.class[i] = CellClass::Door;
            canvas.instance[i] = 0;
        }
    }
    for d in &doors {
        let angle = spec.leaf_angle.sample(&mut rng).to_radians();
        let dir = d.across.scale(angle.cos()) + d.into_room.scale(angle.sin());
        draw_segment(&mut canvas, d.hinge, d.hinge + dir.scale(d.width), d.leaf_room);
    }
    for r in &rooms {
        place_furniture(spec, &mut rng, &mut canvas, r, &doors);
    }

    let rotation_deg = spec.rotation.sample(&mut rng);
    Ok(rasterize(&canvas, &doors, rooms.len(), rotation_deg))
}

fn place_doors(
    spec: &FloorplanSpec,
    rng: &mut ChaCha8Rng,
    rooms: &[RoomPlan],
    t: usize,
    yc: usize,
    corridor_w: usize,
) -> Result<Vec<DoorPlan>> {
    let j = JUNCTION_CLEARANCE as f64;
    let tf = t as f64;
    let mut doors: Vec<DoorPlan> = Vec::new();

    // wall between a room and the corridor: (fixed row span, free col span)
    let corridor_wall = |r: &RoomPlan| -> (f64, f64, f64, Point) {
        let row0 = match r.side {
            Side::Top => (yc - t) as f64,
            Side::Bottom => (yc + corridor_w) as f64,
        };
        let into = match r.side {
            Side::Top => Point::new(0.0, -1.0),
            Side::Bottom => Point::new(0.0, 1.0),
        };
        (row0, r.interior.c0 as f64, (r.interior.c0 + r.interior.w) as f64, into)
    };

    for (idx, room) in rooms.iter().enumerate() {
        let wanted = spec.doors_per_room.sample(rng);
        for k in 0..wanted {
            let mut placed = false;
            for _attempt in 0..24 {
                let dw = cells_of(spec.door_width.sample(rng)) as f64;
                let hinge_first = rng.random_bool(0.5);
                // first door always opens to the corridor
                let neighbours: Vec<usize> = [idx.wrapping_sub(1), idx + 1]
                    .into_iter()
                    .filter(|n| *n < rooms.len() && rooms[*n].side == room.side)
                    .collect();
                let use_neighbour = k > 0 && !neighbours.is_empty() && rng.random_bool(0.5);
                let candidate = if use_neighbour {
                    let other = &rooms[neighbours[rng.random_range(0..neighbours.len())]];
                    side_door(room, other, dw, tf, j, rng, hinge_first)
                } else {
                    let (row0, lo, hi, into) = corridor_wall(room);
                    let a = lo + j;
                    let b = hi - j - dw;
                    if b < a {
                        None
                    } else {
                        let c0 = rng.random_range(a..=b).round();
                        let rect = RotatedRect {
                            center: Point::new(c0 - 0.5 + dw / 2.0, row0 - 0.5 + tf / 2.0),
                            angle: 0.0,
                            half_length: dw / 2.0,
                            half_width: tf / 2.0,
                        };
                        let room_edge = match room.side {
                            Side::Top => row0 - 0.5,
                            Side::Bottom => row0 - 0.5 + tf,
                        };
                        let (hx, across) = if hinge_first {
                            (c0 - 0.5, Point::new(1.0, 0.0))
                        } else {
                            (c0 - 0.5 + dw, Point::new(-1.0, 0.0))
                        };
                        Some(DoorPlan {
                            rect,
                            hinge: Point::new(hx, room_edge),
                            across,
                            into_room: into,
                            width: dw,
                            leaf_room: room.id,
                            connects: [1, room.id],
                            wall: (1, room.id),
                            span: (c0 - 0.5, c0 - 0.5 + dw),
                        })
                    }
                };
                let Some(door) = candidate else { continue };
                if compatible(&door, &doors, j) {
                    doors.push(door);
                    placed = true;
                    break;
                }
            }
            if !placed && k == 0 {
                return Err(Error::InfeasibleSpec(format!(
                    "could not place a corridor door for room {}",
                    room.id
                )));
            }
        }
    }
    Ok(doors)
}

fn side_door(
    room: &RoomPlan,
    other: &RoomPlan,
    dw: f64,
    tf: f64,
    j: f64,
    rng: &mut ChaCha8Rng,
    hinge_first: bool,
) -> Option<DoorPlan> {
    let (a, b) = (room.interior, other.interior);
    let shared_r0 = a.r0.max(b.r0) as f64;
    let shared_r1 = ((a.r0 + a.h).min(b.r0 + b.h)) as f64;
    let lo = shared_r0 + j;
    let hi = shared_r1 - j - dw;
    if hi < lo {
        return None;
    }
    let r0 = rng.random_range(lo..=hi).round();
    let (wall_c0, into) = if b.c0 > a.c0 {
        ((a.c0 + a.w) as f64, Point::new(-1.0, 0.0))
    } else {
        ((b.c0 + b.w) as f64, Point::new(1.0, 0.0))
    };
    let rect = RotatedRect {
        center: Point::new(wall_c0 - 0.5 + tf / 2.0, r0 - 0.5 + dw / 2.0),
        angle: std::f64::consts::FRAC_PI_2,
        half_length: dw / 2.0,
        half_width: tf / 2.0,
    };
    let room_edge = if into.x < 0.0 { wall_c0 - 0.5 } else { wall_c0 - 0.5 + tf };
    let (hy, across) = if hinge_first {
        (r0 - 0.5, Point::new(0.0, 1.0))
    } else {
        (r0 - 0.5 + dw, Point::new(0.0, -1.0))
    };
    let lo_id = room.id.min(other.id);
    let hi_id = room.id.max(other.id);
    Some(DoorPlan {
        rect,
        hinge: Point::new(room_edge, hy),
        across,
        into_room: into,
        width: dw,
        leaf_room: room.id,
        connects: [lo_id, hi_id],
        wall: (lo_id, hi_id),
        span: (r0 - 0.5, r0 - 0.5 + dw),
    })
}

fn compatible(door: &DoorPlan, placed: &[DoorPlan], j: f64) -> bool {
    placed.iter().all(|p| {
        let same_wall = p.wall == door.wall;
        if same_wall && door.span.0 < p.span.1 + j && p.span.0 < door.span.1 + j {
            return false;
        }
        if p.leaf_room == door.leaf_room {
            let gap = (p.hinge - door.hinge).norm();
            if gap < swing_radius(p) + swing_radius(door) {
                return false;
            }
        }
        // leaves never reach into a doorway of another wall
        let near = (door.rect.center - p.rect.center).norm();
        near > 0.5 * (door.width + p.width) + j
    })
}

fn draw_segment(canvas: &mut Canvas, a: Point, b: Point, room: u32) {
    let r0 = (a.y.min(b.y) - 2.0).floor().max(0.0) as usize;
    let r1 = ((a.y.max(b.y) + 2.0).ceil() as usize).min(canvas.height - 1);
    let c0 = (a.x.min(b.x) - 2.0).floor().max(0.0) as usize;
    let c1 = ((a.x.max(b.x) + 2.0).ceil() as usize).min(canvas.width - 1);
    let d = b - a;
    let len2 = d.dot(d);
    for r in r0..=r1 {
        for c in c0..=c1 {
            let i = r * canvas.width + c;
            if canvas.class[i] != CellClass::Room || canvas.instance[i] != room {
                continue;
            }
            let p = Cell::new(r, c).center();
            let s = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
            if (p - (a + d.scale(s))).norm() <= LEAF_HALF_THICKNESS {
                canvas.obstacle[i] = true;
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Rect { r0: f64, c0: f64, h: f64, w: f64 },
    Disc { center: Point, radius: f64 },
}

impl Shape {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            Shape::Rect { r0, c0, h, w } => (r0, c0, r0 + h - 1.0, c0 + w - 1.0),
            Shape::Disc { center, radius } => (
                center.y - radius,
                center.x - radius,
                center.y + radius,
                center.x + radius,
            ),
        }
    }

    fn contains(&self, p: Point) -> bool {
        match *self {
            Shape::Rect { r0, c0, h, w } => {
                p.y >= r0 && p.y <= r0 + h - 1.0 && p.x >= c0 && p.x <= c0 + w - 1.0
            }
            Shape::Disc { center, radius } => (p - center).norm() <= radius,
        }
    }
}

fn box_distance(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> f64 {
    let dr = (b.0 - a.2).max(a.0 - b.2).max(0.0);
    let dc = (b.1 - a.3).max(a.1 - b.3).max(0.0);
    dr.hypot(dc)
}

fn point_box_distance(p: Point, b: (f64, f64, f64, f64)) -> f64 {
    box_distance((p.y, p.x, p.y, p.x), b)
}

fn place_furniture(
    spec: &FloorplanSpec,
    rng: &mut ChaCha8Rng,
    canvas: &mut Canvas,
    room: &RoomPlan,
    doors: &[DoorPlan],
) {
    let count = spec.furniture_per_room.sample(rng);
    let ir = room.interior;
    let inner = (
        ir.r0 as f64 + FURNITURE_CLEARANCE,
        ir.c0 as f64 + FURNITURE_CLEARANCE,
        (ir.r0 + ir.h) as f64 - 1.0 - FURNITURE_CLEARANCE,
        (ir.c0 + ir.w) as f64 - 1.0 - FURNITURE_CLEARANCE,
    );
    let mut placed: Vec<Shape> = Vec::new();
    for _ in 0..count {
        for _attempt in 0..30 {
            let shape = if rng.random_bool(0.5) {
                let h = rng.random_range(4..=24) as f64;
                let w = rng.random_range(4..=24) as f64;
                let r0 = rng.random_range(ir.r0..ir.r0 + ir.h) as f64;
                let c0 = rng.random_range(ir.c0..ir.c0 + ir.w) as f64;
                Shape::Rect { r0, c0, h, w }
            } else {
                let radius = rng.random_range(4..=24) as f64 / 2.0;
                let center = Point::new(
                    rng.random_range(ir.c0..ir.c0 + ir.w) as f64,
                    rng.random_range(ir.r0..ir.r0 + ir.h) as f64,
                );
                Shape::Disc { center, radius }
            };
            let b = shape.bounds();
            if b.0 < inner.0 || b.1 < inner.1 || b.2 > inner.2 || b.3 > inner.3 {
                continue;
            }
            if placed
                .iter()
                .any(|o| box_distance(o.bounds(), b) < FURNITURE_CLEARANCE)
            {
                continue;
            }
            let blocks_door = doors.iter().any(|d| {
                point_box_distance(d.hinge, b) < swing_radius(d) + FURNITURE_CLEARANCE
                    || point_box_distance(d.rect.center, b) < d.width + FURNITURE_CLEARANCE
            });
            if blocks_door {
                continue;
            }
            placed.push(shape);
            break;
        }
    }
    for shape in &placed {
        let b = shape.bounds();
        for r in b.0.floor() as usize..=b.2.ceil() as usize {
            for c in b.1.floor() as usize..=b.3.ceil() as usize {
                let i = r * canvas.width + c;
                if canvas.class[i] == CellClass::Room && shape.contains(Cell::new(r, c).center()) {
                    canvas.obstacle[i] = true;
                }
            }
        }
    }
}

/// Rotate the layout by `rotation_deg` about its center and resample with
/// nearest neighbour onto a canvas large enough to hold it.
fn rasterize(
    canvas: &Canvas,
    doors: &[DoorPlan],
    room_count: usize,
    rotation_deg: f64,
) -> (OccupancyGrid, GroundTruth) {
    let theta = rotation_deg.to_radians();
    let (sin, cos) = theta.sin_cos();
    let (w0, h0) = (canvas.width as f64, canvas.height as f64);
    let half_w = 0.5 * (cos.abs() * w0 + sin.abs() * h0);
    let half_h = 0.5 * (sin.abs() * w0 + cos.abs() * h0);
    let width = (2.0 * half_w - 1e-9).ceil() as usize;
    let height = (2.0 * half_h - 1e-9).ceil() as usize;
    let c_in = Point::new(0.5 * (w0 - 1.0), 0.5 * (h0 - 1.0));
    let c_out = Point::new(0.5 * (width as f64 - 1.0), 0.5 * (height as f64 - 1.0));
    let forward = |p: Point| {
        let d = p - c_in;
        Point::new(cos * d.x - sin * d.y, sin * d.x + cos * d.y) + c_out
    };

    let n = width * height;
    let mut class = vec![CellClass::Exterior; n];
    let mut instance = vec![0u32; n];
    let mut obstacle = vec![false; n];
    for r in 0..height {
        for c in 0..width {
            let d = Point::new(c as f64, r as f64) - c_out;
            let src = Point::new(cos * d.x + sin * d.y, -sin * d.x + cos * d.y) + c_in;
            let (sr, sc) = (src.y.round(), src.x.round());
            if sr < 0.0 || sc < 0.0 || sr >= h0 || sc >= w0 {
                continue;
            }
            let j = sr as usize * canvas.width + sc as usize;
            let i = r * width + c;
            class[i] = canvas.class[j];
            instance[i] = canvas.instance[j];
            obstacle[i] = canvas.obstacle[j];
        }
    }

    let annotations: Vec<DoorAnnotation> = doors
        .iter()
        .enumerate()
        .map(|(id, d)| {
            let mbr = RotatedRect {
                center: forward(d.rect.center),
                angle: normalize_angle(d.rect.angle + theta),
                ..d.rect
            };
            DoorAnnotation::new(id, mbr, d.connects, width, height)
        })
        .collect();
    // the door rectangles define door cells exactly; resampling ties become wall
    let mut is_door = vec![false; n];
    for a in &annotations {
        for cell in a.cells.iter() {
            is_door[cell.row * width + cell.col] = true;
        }
    }
    for i in 0..n {
        if is_door[i] {
            class[i] = CellClass::Door;
            instance[i] = 0;
            obstacle[i] = false;
        } else if class[i] == CellClass::Door {
            class[i] = CellClass::Wall;
        }
    }

    let unknown_p = unknown_probability();
    let mut cells = Vec::with_capacity(n);
    let mut unknown = Vec::with_capacity(n);
    for i in 0..n {
        let (p, u) = match class[i] {
            CellClass::Exterior => (unknown_p, true),
            CellClass::Wall => (1.0, false),
            _ if obstacle[i] => (1.0, false),
            _ => (0.0, false),
        };
        cells.push(p);
        unknown.push(u);
    }
    let grid = OccupancyGrid::new(width, height, TARGET_RESOLUTION, [0.0, 0.0], cells, unknown)
        .expect("simulated grid is well formed");

    let mut instances = vec![Instance {
        id: 1,
        kind: InstanceKind::Corridor,
    }];
    instances.extend((0..room_count).map(|k| Instance {
        id: k as u32 + 2,
        kind: InstanceKind::Room,
    }));
    let gt = GroundTruth {
        width,
        height,
        rotation_deg,
        doors: annotations,
        instances,
        classes: class,
        instance_map: instance,
    };
    (grid, gt)
}
