//! Computational-geometry kernel: points, polylines, polygons, boxes and
//! raster grids.
//!
//! Pixel model used throughout: pixel `(c, r)` is the unit cell
//! `[c, c+1) x [r, r+1)` with center `(c + 0.5, r + 0.5)`. Coordinates are in
//! pixels with the origin at the top-left corner, x rightward, y downward.

mod buffer;
mod clip;
mod contour;
mod polygon;
mod raster;

pub use buffer::{buffer_polygon, buffer_polygon_with, DEFAULT_CHORDS_PER_CIRCLE};
pub use contour::extract_contour;
pub use polygon::{polygon_iou, Polygon};
pub use raster::{binarize, box_mask_overlap_area, connected_components, rasterize_polyline, BinaryMask, RasterGrid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in pixel coordinates. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point2D {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point2D> for [f64; 2] {
    fn from(p: Point2D) -> Self {
        [p.x, p.y]
    }
}

/// Squared distance from `p` to the closed segment `a`-`b`.
pub(crate) fn point_segment_distance_sq(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.x + t * dx - p.x, a.y + t * dy - p.y);
    qx * qx + qy * qy
}

/// An ordered open polyline with at least two points and positive length.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Point2D>,
}

impl Polyline {
    pub fn new(points: Vec<Point2D>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite polyline coordinate".into()));
        }
        let line = Self { points };
        if line.length() <= 0.0 {
            return Err(Error::InvalidGeometry("polyline has zero length".into()));
        }
        Ok(line)
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point2D> {
        self.points
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point2D, Point2D)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    /// Total arc length.
    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(&b)).sum()
    }

    /// Euclidean distance from `p` to the nearest point on the polyline.
    pub fn distance_to(&self, p: Point2D) -> f64 {
        self.segments()
            .map(|(a, b)| point_segment_distance_sq(p, a, b))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Point at arc-length position `s` (clamped to the polyline's extent).
    pub fn point_at(&self, s: f64) -> Point2D {
        let mut remaining = s.max(0.0);
        for (a, b) in self.segments() {
            let len = a.distance(&b);
            if remaining <= len && len > 0.0 {
                let t = remaining / len;
                return Point2D::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
            }
            remaining -= len;
        }
        *self.points.last().expect("polyline has points")
    }

    /// Unit tangent at arc-length position `s`.
    pub fn tangent_at(&self, s: f64) -> (f64, f64) {
        let mut remaining = s.max(0.0);
        let mut last = (1.0, 0.0);
        for (a, b) in self.segments() {
            let len = a.distance(&b);
            if len > 0.0 {
                last = ((b.x - a.x) / len, (b.y - a.y) / len);
                if remaining <= len {
                    return last;
                }
            }
            remaining -= len;
        }
        last
    }
}

/// Axis-aligned box `[x1, x2] x [y1, y2]` with `x1 < x2` and `y1 < y2`.
/// Serialized as `[x1, y1, x2, y2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct AxisAlignedBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl AxisAlignedBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        if !(x1.is_finite() && y1.is_finite() && x2.is_finite() && y2.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite box coordinate".into()));
        }
        if !(x1 < x2 && y1 < y2) {
            return Err(Error::InvalidGeometry(format!(
                "box [{x1}, {y1}, {x2}, {y2}] is empty or inverted"
            )));
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    /// Box of the given size centered on `center`.
    pub fn from_center(center: Point2D, width: f64, height: f64) -> Result<Self> {
        Self::new(
            center.x - width / 2.0,
            center.y - height / 2.0,
            center.x + width / 2.0,
            center.y + height / 2.0,
        )
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point2D {
        Point2D::new((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    /// Closed containment test.
    pub fn contains(&self, p: Point2D) -> bool {
        p.x >= self.x1 && p.x <= self.x2 && p.y >= self.y1 && p.y <= self.y2
    }

    pub fn intersection_area(&self, other: &AxisAlignedBox) -> f64 {
        let w = self.x2.min(other.x2) - self.x1.max(other.x1);
        let h = self.y2.min(other.y2) - self.y1.max(other.y1);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }

    pub fn iou(&self, other: &AxisAlignedBox) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union > 0.0 {
            inter / union
        } else {
            0.0
        }
    }

    /// True when the closed boxes share at least one point.
    pub fn touches(&self, other: &AxisAlignedBox) -> bool {
        self.x1 <= other.x2 && other.x1 <= self.x2 && self.y1 <= other.y2 && other.y1 <= self.y2
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::new(vec![
            Point2D::new(self.x1, self.y1),
            Point2D::new(self.x2, self.y1),
            Point2D::new(self.x2, self.y2),
            Point2D::new(self.x1, self.y2),
        ])
        .expect("valid box is a valid polygon")
    }

    /// Closed segment/box intersection (Liang-Barsky clipping).
    pub fn intersects_segment(&self, a: Point2D, b: Point2D) -> bool {
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        for (p, q) in [
            (-dx, a.x - self.x1),
            (dx, self.x2 - a.x),
            (-dy, a.y - self.y1),
            (dy, self.y2 - a.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

impl TryFrom<[f64; 4]> for AxisAlignedBox {
    type Error = Error;

    fn try_from([x1, y1, x2, y2]: [f64; 4]) -> Result<Self> {
        Self::new(x1, y1, x2, y2)
    }
}

impl From<AxisAlignedBox> for [f64; 4] {
    fn from(b: AxisAlignedBox) -> Self {
        [b.x1, b.y1, b.x2, b.y2]
    }
}

/// True iff any segment of `line` intersects the closed `bbox`.
pub fn box_polyline_intersects(bbox: &AxisAlignedBox, line: &Polyline) -> bool {
    line.segments().any(|(a, b)| bbox.intersects_segment(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x1: f64, y1: f64, x2: f64, y2: f64) -> AxisAlignedBox {
        AxisAlignedBox::new(x1, y1, x2, y2).unwrap()
    }

    fn seg(a: (f64, f64), b: (f64, f64)) -> Polyline {
        Polyline::new(vec![Point2D::new(a.0, a.1), Point2D::new(b.0, b.1)]).unwrap()
    }

    #[test]
    fn segment_inside_box() {
        assert!(box_polyline_intersects(&bx(0., 0., 10., 10.), &seg((2., 5.), (8., 5.))));
    }

    #[test]
    fn disjoint_segment() {
        assert!(!box_polyline_intersects(
            &bx(0., 0., 10., 10.),
            &seg((20., 20.), (30., 20.))
        ));
    }

    #[test]
    fn crossing_segment() {
        assert!(box_polyline_intersects(
            &bx(0., 0., 10., 10.),
            &seg((-5., 5.), (15., 5.))
        ));
    }

    #[test]
    fn touching_corner_counts() {
        assert!(box_polyline_intersects(
            &bx(0., 0., 10., 10.),
            &seg((10., 10.), (20., 20.))
        ));
        assert!(!box_polyline_intersects(
            &bx(0., 0., 10., 10.),
            &seg((10.5, 0.), (20., -10.))
        ));
    }

    #[test]
    fn diagonal_miss_near_corner() {
        // passes outside the top-right corner
        assert!(!box_polyline_intersects(
            &bx(0., 0., 10., 10.),
            &seg((9., -2.), (12., 1.))
        ));
        assert!(box_polyline_intersects(
            &bx(0., 0., 10., 10.),
            &seg((8., -2.), (12., 2.))
        ));
    }

    #[test]
    fn polyline_rejects_degenerate() {
        assert!(Polyline::new(vec![Point2D::new(1., 1.)]).is_err());
        assert!(Polyline::new(vec![Point2D::new(1., 1.), Point2D::new(1., 1.)]).is_err());
        assert!(Polyline::new(vec![Point2D::new(f64::NAN, 1.), Point2D::new(1., 1.)]).is_err());
    }

    #[test]
    fn box_rejects_inverted() {
        assert!(AxisAlignedBox::new(1., 0., 1., 2.).is_err());
        assert!(serde_json::from_str::<AxisAlignedBox>("[3,0,1,2]").is_err());
    }

    #[test]
    fn point_at_walks_arc_length() {
        let line = Polyline::new(vec![
            Point2D::new(0., 0.),
            Point2D::new(10., 0.),
            Point2D::new(10., 10.),
        ])
        .unwrap();
        assert_eq!(line.point_at(15.0), Point2D::new(10., 5.));
        assert_eq!(line.point_at(100.0), Point2D::new(10., 10.));
        assert_eq!(line.tangent_at(12.0), (0.0, 1.0));
    }
}
