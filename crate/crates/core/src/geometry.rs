//! Planar geometry: convex hulls and minimum-area bounding rectangles.

use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::cells::{Cell, CellSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl Add for Point {
    type Output = Point;

    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

/// z-component of (a - o) x (b - o); positive for a counter-clockwise turn.
pub fn turn(o: Point, a: Point, b: Point) -> f64 {
    (a - o).cross(b - o)
}

/// Convex hull by Andrew's monotone chain. Vertices are returned
/// counter-clockwise (in the math orientation of the input coordinates),
/// starting from the lexicographically smallest point, with collinear
/// points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in pts.iter() {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Shoelace area; positive for counter-clockwise polygons.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    acc / 2.0
}

/// Whether `p` lies inside or on a counter-clockwise convex polygon.
pub fn convex_contains(poly: &[Point], p: Point, eps: f64) -> bool {
    match poly.len() {
        0 => false,
        1 => (p - poly[0]).norm() <= eps,
        2 => {
            let d = poly[1] - poly[0];
            let len = d.norm();
            if len == 0.0 {
                return (p - poly[0]).norm() <= eps;
            }
            let t = (p - poly[0]).dot(d) / (len * len);
            ((p - poly[0]).cross(d) / len).abs() <= eps && (-eps..=1.0 + eps).contains(&t)
        }
        n => (0..n).all(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            let len = (b - a).norm().max(f64::MIN_POSITIVE);
            turn(a, b, p) / len >= -eps
        }),
    }
}

/// Corner points of the unit squares of `cells`.
pub fn cell_corners(cells: &CellSet) -> Vec<Point> {
    let mut pts = Vec::with_capacity(cells.len() * 4);
    for c in cells.iter() {
        let (x, y) = (c.col as f64, c.row as f64);
        pts.extend([
            Point::new(x - 0.5, y - 0.5),
            Point::new(x + 0.5, y - 0.5),
            Point::new(x + 0.5, y + 0.5),
            Point::new(x - 0.5, y + 0.5),
        ]);
    }
    pts
}

/// A possibly rotated rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatedRect {
    pub center: Point,
    /// Direction of the first side, radians, normalized to [0, pi).
    pub angle: f64,
    /// Half extent along `angle`.
    pub half_length: f64,
    /// Half extent perpendicular to `angle`.
    pub half_width: f64,
}

impl RotatedRect {
    pub fn axes(&self) -> (Point, Point) {
        let u = Point::new(self.angle.cos(), self.angle.sin());
        (u, Point::new(-u.y, u.x))
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_length * self.half_width
    }

    pub fn inflate(&self, d: f64) -> RotatedRect {
        RotatedRect {
            half_length: self.half_length + d,
            half_width: self.half_width + d,
            ..*self
        }
    }

    /// Four corners in counter-clockwise order.
    pub fn corners(&self) -> [Point; 4] {
        let (u, n) = self.axes();
        let a = u.scale(self.half_length);
        let b = n.scale(self.half_width);
        let c = self.center;
        [
            c - a - b,
            c + a - b,
            c + a + b,
            c - a + b,
        ]
    }

    pub fn contains(&self, p: Point, eps: f64) -> bool {
        let (u, n) = self.axes();
        let d = p - self.center;
        d.dot(u).abs() <= self.half_length + eps && d.dot(n).abs() <= self.half_width + eps
    }

    /// Cells whose centers lie inside the rectangle, clipped to the grid.
    pub fn raster(&self, width: usize, height: usize) -> CellSet {
        let corners = self.corners();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in corners {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        let c0 = x0.floor().max(0.0) as usize;
        let r0 = y0.floor().max(0.0) as usize;
        let c1 = (x1.ceil().max(0.0) as usize).min(width.saturating_sub(1));
        let r1 = (y1.ceil().max(0.0) as usize).min(height.saturating_sub(1));
        let mut out = Vec::new();
        if width == 0 || height == 0 {
            return CellSet::new();
        }
        for r in r0..=r1 {
            for c in c0..=c1 {
                let cell = Cell::new(r, c);
                if self.contains(cell.center(), 1e-9) {
                    out.push(cell);
                }
            }
        }
        out.into_iter().collect()
    }
}

pub fn normalize_angle(a: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut a = a % pi;
    if a < 0.0 {
        a += pi;
    }
    if (pi - a).abs() < 1e-12 {
        0.0
    } else {
        a
    }
}

/// Minimum-area rectangle enclosing `points`.
///
/// Relies on the rotating-calipers property that an optimal rectangle has
/// one side flush with a hull edge, so every hull edge direction is tried.
/// Returns `None` for an empty input.
pub fn min_area_rect(points: &[Point]) -> Option<RotatedRect> {
    let hull = convex_hull(points);
    match hull.len() {
        0 => None,
        1 => Some(RotatedRect {
            center: hull[0],
            angle: 0.0,
            half_length: 0.0,
            half_width: 0.0,
        }),
        2 => {
            let d = hull[1] - hull[0];
            Some(RotatedRect {
                center: hull[0] + d.scale(0.5),
                angle: normalize_angle(d.y.atan2(d.x)),
                half_length: d.norm() / 2.0,
                half_width: 0.0,
            })
        }
        n => {
            let mut best: Option<(f64, RotatedRect)> = None;
            for i in 0..n {
                let d = hull[(i + 1) % n] - hull[i];
                let len = d.norm();
                if len == 0.0 {
                    continue;
                }
                let u = d.scale(1.0 / len);
                let v = Point::new(-u.y, u.x);
                let (mut lo_u, mut hi_u, mut lo_v, mut hi_v) =
                    (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
                for p in &hull {
                    let pu = p.dot(u);
                    let pv = p.dot(v);
                    lo_u = lo_u.min(pu);
                    hi_u = hi_u.max(pu);
                    lo_v = lo_v.min(pv);
                    hi_v = hi_v.max(pv);
                }
                let area = (hi_u - lo_u) * (hi_v - lo_v);
                if best.as_ref().is_none_or(|(a, _)| area < *a - 1e-9) {
                    let cu = (lo_u + hi_u) / 2.0;
                    let cv = (lo_v + hi_v) / 2.0;
                    best = Some((
                        area,
                        RotatedRect {
                            center: u.scale(cu) + v.scale(cv),
                            angle: normalize_angle(u.y.atan2(u.x)),
                            half_length: (hi_u - lo_u) / 2.0,
                            half_width: (hi_v - lo_v) / 2.0,
                        },
                    ));
                }
            }
            best.map(|(_, r)| r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn hull_drops_interior_and_collinear() {
        let mut pts = Vec::new();
        for x in 0..5 {
            for y in 0..5 {
                pts.push(Point::new(x as f64, y as f64));
            }
        }
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert_abs_diff_eq!(signed_area(&hull), 16.0);
    }

    #[test]
    fn rect_of_axis_aligned_points() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(9.0, 0.0),
            Point::new(9.0, 2.0),
            Point::new(0.0, 2.0),
            Point::new(4.0, 1.0),
        ];
        let r = min_area_rect(&pts).unwrap();
        assert_abs_diff_eq!(r.area(), 18.0, epsilon = 1e-9);
        for p in pts {
            assert!(r.contains(p, 1e-9));
        }
    }

    proptest! {
        #[test]
        fn rect_encloses_points(pts in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..40)) {
            let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
            let r = min_area_rect(&pts).unwrap();
            for p in &pts {
                prop_assert!(r.contains(*p, 1e-6));
            }
            // never worse than the axis-aligned box
            let (x0, x1) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.x), b.max(p.x)));
            let (y0, y1) = pts.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.y), b.max(p.y)));
            prop_assert!(r.area() <= (x1 - x0) * (y1 - y0) + 1e-6);
        }

        #[test]
        fn hull_is_convex_ccw(pts in proptest::collection::vec((-20i32..20, -20i32..20), 3..60)) {
            let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x as f64, y as f64)).collect();
            let hull = convex_hull(&pts);
            let n = hull.len();
            if n >= 3 {
                for i in 0..n {
                    prop_assert!(turn(hull[i], hull[(i + 1) % n], hull[(i + 2) % n]) > 0.0);
                }
                for p in &pts {
                    prop_assert!(convex_contains(&hull, *p, 1e-9));
                }
            }
        }
    }
}
