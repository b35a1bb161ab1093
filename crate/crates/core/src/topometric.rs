//! Topometric map: rooms, corridors and doors as graph nodes carrying a
//! centroid and a convex shape in world meters.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cells::CellSet;
use crate::cluster::DoorHypothesis;
use crate::error::{Error, Result};
use crate::geometry::{self, cell_corners, Point};
use crate::grid::OccupancyGrid;
use crate::place::{PlaceClass, ScoreTable};
use crate::render::{self, CORRIDOR_COLOR, DOOR_COLOR, ROOM_COLOR, WALL_COLOR};
use crate::segmentation::SegmentLabelMap;
use crate::validation::DoorLink;

pub const TOPOMETRIC_FORMAT_VERSION: u32 = 1;

/// Placement of the cell lattice in the world.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapFrame {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    /// World position of the lower-left corner of the bottom-left cell.
    pub origin: [f64; 2],
}

impl MapFrame {
    pub fn of(grid: &OccupancyGrid) -> Self {
        MapFrame {
            width: grid.width(),
            height: grid.height(),
            resolution: grid.resolution(),
            origin: grid.origin(),
        }
    }

    /// World point of a continuous (x = col, y = row) lattice position,
    /// integer positions being cell centers. Rows grow downwards, world y
    /// grows upwards.
    pub fn to_world(&self, p: Point) -> Point {
        Point::new(
            self.origin[0] + (p.x + 0.5) * self.resolution,
            self.origin[1] + (self.height as f64 - p.y - 0.5) * self.resolution,
        )
    }
}

/// Convex hull of cell centers, counter-clockwise in (col, row) space.
///
/// A hull that degenerates to a point or a segment is replaced by the hull
/// of the cells' unit squares, so one cell gives its 4-corner square.
pub fn convex_hull(cells: &CellSet) -> Vec<Point> {
    let centers: Vec<Point> = cells.iter().map(|c| c.center()).collect();
    let hull = geometry::convex_hull(&centers);
    if hull.len() >= 3 || cells.is_empty() {
        return hull;
    }
    geometry::convex_hull(&cell_corners(cells))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "id")]
pub enum EntitySource {
    Segment(u32),
    Door(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: usize,
    pub class: PlaceClass,
    /// Reference point in world meters.
    pub centroid: [f64; 2],
    /// Convex polygon in world meters, counter-clockwise.
    pub hull: Vec<[f64; 2]>,
    /// Covered area in square meters: cell count for segments, rectangle
    /// area for doors.
    pub area: f64,
    pub source: EntitySource,
}

/// A door node and the two places it links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoorEdge {
    pub door: usize,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopometricMap {
    pub version: u32,
    pub frame: MapFrame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub entities: Vec<Entity>,
    pub edges: Vec<DoorEdge>,
    /// Valid doors left out because they do not link two segments.
    pub unlinked_doors: Vec<usize>,
    /// Per-cell class index for rendering: 0 other, 1 room, 2 corridor, 3 door.
    #[serde(skip)]
    pub raster: Vec<u8>,
}

impl TopometricMap {
    pub fn empty(frame: MapFrame) -> Self {
        TopometricMap {
            version: TOPOMETRIC_FORMAT_VERSION,
            frame,
            source: None,
            entities: Vec::new(),
            edges: Vec::new(),
            unlinked_doors: Vec::new(),
            raster: vec![0; frame.width * frame.height],
        }
    }

    pub fn count(&self, class: PlaceClass) -> usize {
        self.entities.iter().filter(|e| e.class == class).count()
    }

    /// Entity ids adjacent to `id`.
    pub fn neighbors(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.door == id {
                out.extend([e.a, e.b]);
            } else if e.a == id || e.b == id {
                out.push(e.door);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Connected components of the entity graph.
    pub fn component_count(&self) -> usize {
        let mut ds = crate::segmentation::DisjointSet::new(self.entities.len());
        for e in &self.edges {
            ds.union(e.door, e.a);
            ds.union(e.door, e.b);
        }
        let mut roots: Vec<usize> = (0..self.entities.len()).map(|i| ds.find(i)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }
}

fn world_polygon(frame: &MapFrame, pts: &[Point]) -> Vec<Point> {
    // the y flip reverses orientation, so rebuild the hull in world space
    let world: Vec<Point> = pts.iter().map(|p| frame.to_world(*p)).collect();
    geometry::convex_hull(&world)
}

fn pair(p: Point) -> [f64; 2] {
    [p.x, p.y]
}

/// Assemble entities and door edges.
///
/// Segment entities take their class from `scores` and their shape from
/// the hull of their cell squares, which always covers the cells. Doors
/// take the rotated bounding rectangle as shape.
pub fn build(
    labels: &SegmentLabelMap,
    doors: &[DoorHypothesis],
    links: &[DoorLink],
    scores: &ScoreTable,
    frame: &MapFrame,
) -> Result<TopometricMap> {
    if labels.width() != frame.width || labels.height() != frame.height {
        return Err(Error::InvalidGrid(format!(
            "label map {}x{} does not match frame {}x{}",
            labels.width(),
            labels.height(),
            frame.width,
            frame.height
        )));
    }
    let cell_area = frame.resolution * frame.resolution;
    let mut map = TopometricMap::empty(*frame);

    let segments = labels.segment_cells();
    for (i, cells) in segments.iter().enumerate() {
        let seg = i as u32 + 1;
        let class = scores.label(seg).unwrap_or(PlaceClass::Room);
        let (r, c) = cells.centroid().ok_or(Error::EmptyCells)?;
        let hull = world_polygon(frame, &cell_corners(cells));
        map.entities.push(Entity {
            id: map.entities.len(),
            class,
            centroid: pair(frame.to_world(Point::new(c, r))),
            hull: hull.into_iter().map(pair).collect(),
            area: cells.len() as f64 * cell_area,
            source: EntitySource::Segment(seg),
        });
    }
    for (i, l) in labels.labels().iter().enumerate() {
        if *l > 0 {
            map.raster[i] = match map.entities[*l as usize - 1].class {
                PlaceClass::Corridor => 2,
                _ => 1,
            };
        }
    }

    for link in links {
        let door = doors
            .iter()
            .find(|d| d.id == link.door)
            .ok_or(Error::UnknownHypothesis(link.door))?;
        let Some([a, b]) = link.segments else {
            map.unlinked_doors.push(link.door);
            continue;
        };
        for s in [a, b] {
            if s == 0 || s > labels.count() {
                return Err(Error::MissingSegment {
                    door: link.door,
                    segment: s,
                });
            }
        }
        let corners = door.mbr.corners();
        let id = map.entities.len();
        map.entities.push(Entity {
            id,
            class: PlaceClass::Door,
            centroid: pair(frame.to_world(door.mbr.center)),
            hull: world_polygon(frame, &corners).into_iter().map(pair).collect(),
            area: door.mbr.area() * cell_area,
            source: EntitySource::Door(door.id),
        });
        map.edges.push(DoorEdge {
            door: id,
            a: a as usize - 1,
            b: b as usize - 1,
        });
        for cell in door.cells.iter() {
            map.raster[cell.row * frame.width + cell.col] = 3;
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    /// Graphviz DOT.
    Dot,
    Json,
    Png,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" | "graph-dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            "png" | "image" => Ok(ExportFormat::Png),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Serialize the map. Output bytes depend only on the map.
pub fn export(m: &TopometricMap, format: ExportFormat) -> Result<Vec<u8>> {
    match format {
        ExportFormat::Dot => Ok(to_dot(m).into_bytes()),
        ExportFormat::Json => {
            let mut s = serde_json::to_string_pretty(m)?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        ExportFormat::Png => {
            let palette = [WALL_COLOR, ROOM_COLOR, CORRIDOR_COLOR, DOOR_COLOR];
            render::encode_indexed(m.frame.width, m.frame.height, &m.raster, &palette)
        }
    }
}

/// Graphviz rendering. Nodes are `n<id>` with `class`, `x`, `y` (centroid,
/// meters) and `area` (m^2) attributes; `pos` pins the layout to the
/// centroid. Every door contributes two undirected edges.
pub fn to_dot(m: &TopometricMap) -> String {
    let mut s = String::from("graph topometric {\n");
    s.push_str("  node [shape=box, style=filled];\n");
    for e in &m.entities {
        let (label, color) = match (e.class, e.source) {
            (PlaceClass::Door, EntitySource::Door(d)) => (format!("door {d}"), DOOR_COLOR),
            (class, EntitySource::Segment(seg)) => (
                format!("{} {seg}", class.as_str()),
                if class == PlaceClass::Corridor { CORRIDOR_COLOR } else { ROOM_COLOR },
            ),
            (class, EntitySource::Door(d)) => (format!("{} {d}", class.as_str()), DOOR_COLOR),
        };
        let _ = writeln!(
            s,
            "  n{} [label=\"{}\", class=\"{}\", x=\"{:.3}\", y=\"{:.3}\", area=\"{:.3}\", pos=\"{:.3},{:.3}!\", fillcolor=\"#{:02x}{:02x}{:02x}\"];",
            e.id,
            label,
            e.class.as_str(),
            e.centroid[0],
            e.centroid[1],
            e.area,
            e.centroid[0],
            e.centroid[1],
            color[0],
            color[1],
            color[2]
        );
    }
    for e in &m.edges {
        let _ = writeln!(s, "  n{} -- n{};", e.a, e.door);
        let _ = writeln!(s, "  n{} -- n{};", e.door, e.b);
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::Cell;
    use crate::geometry::{convex_contains, signed_area};
    use crate::grid::BinaryGrid;
    use crate::place::{categorize, PlaceParams};
    use crate::segmentation::{segment, SegmentMethod, SegmentParams};
    use crate::validation::{associate_doors, validate, ValidationParams};
    use proptest::prelude::*;

    fn block(r0: usize, c0: usize, h: usize, w: usize) -> CellSet {
        (r0..r0 + h)
            .flat_map(|r| (c0..c0 + w).map(move |c| Cell::new(r, c)))
            .collect()
    }

    #[test]
    fn hull_examples() {
        let tri: CellSet = [Cell::new(0, 0), Cell::new(0, 4), Cell::new(3, 0)].into_iter().collect();
        assert_eq!(convex_hull(&tri).len(), 3);
        let sq = convex_hull(&block(0, 0, 10, 10));
        assert_eq!(sq.len(), 4);
        assert!((signed_area(&sq) - 81.0).abs() < 1e-9);
        let one = convex_hull(&block(5, 5, 1, 1));
        assert_eq!(one.len(), 4);
        assert!((signed_area(&one) - 1.0).abs() < 1e-9);
        let l = block(0, 0, 10, 1).union(&block(9, 0, 1, 10));
        let h = convex_hull(&l);
        assert!((3..=5).contains(&h.len()));
        // hull of centers is the triangle (0,0), (9,0), (9,9)
        assert!((signed_area(&h) - 40.5).abs() < 1e-9);
    }

    // one room above, one corridor below, a door at cols 10..20
    fn scene() -> (BinaryGrid, DoorHypothesis) {
        let rows: Vec<String> = (0..40)
            .map(|r| {
                (0..60)
                    .map(|c| {
                        let wall = (18..22).contains(&r) && !(10..20).contains(&c);
                        if wall { '#' } else { '.' }
                    })
                    .collect()
            })
            .collect();
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        let b = BinaryGrid::from_rows(&refs);
        let door = DoorHypothesis::from_cells(0, block(18, 10, 4, 10), 1.0, 60, 40).unwrap();
        (b, door)
    }

    fn frame() -> MapFrame {
        MapFrame {
            width: 60,
            height: 40,
            resolution: 0.05,
            origin: [-1.0, 2.0],
        }
    }

    fn build_scene() -> TopometricMap {
        let (b, door) = scene();
        let params = ValidationParams::default();
        let v = validate(&b, &[door], &params).unwrap();
        let valid: Vec<DoorHypothesis> = v.valid().cloned().collect();
        let links = associate_doors(&valid, &v.labels, params.seal_margin);
        let pairs: Vec<[u32; 2]> = links.iter().filter_map(|l| l.segments).collect();
        let scores = categorize(&v.labels, &pairs, &PlaceParams::default()).unwrap();
        build(&v.labels, &valid, &links, &scores, &frame()).unwrap()
    }

    #[test]
    fn smallest_scene() {
        let m = build_scene();
        assert_eq!(m.entities.len(), 3);
        assert_eq!(m.edges.len(), 1);
        assert_eq!(m.count(PlaceClass::Door), 1);
        let door = m.edges[0].door;
        assert_eq!(m.neighbors(door), vec![0, 1]);
        assert_eq!(m.neighbors(0), vec![door]);
        assert_eq!(m.component_count(), 1);
        for e in &m.entities {
            assert!(e.area > 0.0);
            let hull: Vec<Point> = e.hull.iter().map(|p| Point::new(p[0], p[1])).collect();
            assert!(signed_area(&hull) > 0.0, "counter-clockwise");
            assert!(convex_contains(&hull, Point::new(e.centroid[0], e.centroid[1]), 1e-9));
        }
        let dot = to_dot(&m);
        assert_eq!(dot.matches(" -- ").count(), 2);
        assert_eq!(dot.matches("[label=").count(), 3);
    }

    #[test]
    fn world_coordinates() {
        let f = frame();
        // top-left cell center
        let p = f.to_world(Point::new(0.0, 0.0));
        assert!((p.x - (-1.0 + 0.025)).abs() < 1e-12);
        assert!((p.y - (2.0 + 39.5 * 0.05)).abs() < 1e-12);
    }

    #[test]
    fn exports_are_deterministic() {
        let m = build_scene();
        for f in [ExportFormat::Dot, ExportFormat::Json, ExportFormat::Png] {
            assert_eq!(export(&m, f).unwrap(), export(&build_scene(), f).unwrap());
        }
        let back: TopometricMap = serde_json::from_slice(&export(&m, ExportFormat::Json).unwrap()).unwrap();
        assert_eq!(back.entities, m.entities);
        assert!("svg".parse::<ExportFormat>().is_err());
    }

    #[test]
    fn empty_map_exports() {
        let m = TopometricMap::empty(frame());
        assert_eq!(to_dot(&m), "graph topometric {\n  node [shape=box, style=filled];\n}\n");
        assert!(!export(&m, ExportFormat::Png).unwrap().is_empty());
        let json: serde_json::Value = serde_json::from_slice(&export(&m, ExportFormat::Json).unwrap()).unwrap();
        assert_eq!(json["entities"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn missing_segment_is_an_error() {
        let (b, door) = scene();
        let labels = segment(&b, &SegmentParams { method: SegmentMethod::Components, min_size: 1 });
        let links = [DoorLink { door: 0, segments: Some([1, 7]), ambiguous: false }];
        let scores = categorize(&labels, &[], &PlaceParams::default()).unwrap();
        assert!(matches!(
            build(&labels, &[door], &links, &scores, &frame()),
            Err(Error::MissingSegment { segment: 7, .. })
        ));
    }

    proptest! {
        #[test]
        fn segment_hulls_cover_cells(cells in proptest::collection::btree_set((0usize..30, 0usize..30), 1..80)) {
            let set: CellSet = cells.into_iter().map(|(r, c)| Cell::new(r, c)).collect();
            let hull = geometry::convex_hull(&cell_corners(&set));
            prop_assert!(signed_area(&hull) >= set.len() as f64 - 1e-9);
            let (r, c) = set.centroid().unwrap();
            prop_assert!(convex_contains(&hull, Point::new(c, r), 1e-9));
            let centers = convex_hull(&set);
            for cell in set.iter() {
                prop_assert!(convex_contains(&centers, cell.center(), 1e-9));
            }
        }
    }
}
