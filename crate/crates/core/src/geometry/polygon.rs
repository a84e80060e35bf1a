use geo::{Area, BooleanOps, Coord, LineString};
use serde::{Deserialize, Serialize};

use super::{clip, point_segment_distance_sq, AxisAlignedBox, Point2D};
use crate::error::{Error, Result};

/// A simple polygon stored with positive signed (shoelace) area.
///
/// In the y-down image frame a positive shoelace area corresponds to a
/// clockwise walk on screen; in the usual y-up math frame it is
/// counter-clockwise. The ring is implicitly closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2D>", into = "Vec<Point2D>")]
pub struct Polygon {
    vertices: Vec<Point2D>,
}

fn signed_area(vertices: &[Point2D]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}

impl Polygon {
    /// Builds a polygon from a vertex ring. Consecutive duplicates and an
    /// explicit closing vertex are dropped, orientation is normalized.
    /// Self-intersection is not checked here; see [`Polygon::repaired`].
    pub fn new(vertices: Vec<Point2D>) -> Result<Self> {
        let mut vertices = normalize_ring(vertices)?;
        let area = signed_area(&vertices);
        if area == 0.0 || !area.is_finite() {
            return Err(Error::DegeneratePolygon);
        }
        if area < 0.0 {
            vertices.reverse();
        }
        Ok(Self { vertices })
    }

    /// Like [`Polygon::new`], but a self-intersecting ring is resolved with a
    /// boolean union and the largest resulting piece is kept.
    pub fn repaired(vertices: Vec<Point2D>) -> Result<Self> {
        let ring = normalize_ring(vertices)?;
        if ring_is_simple(&ring) {
            return Self::new(ring);
        }
        let raw = Self { vertices: ring };
        let unioned = raw.to_geo().union(&geo::MultiPolygon::<f64>(vec![]));
        let largest = unioned
            .0
            .into_iter()
            .max_by(|a, b| a.unsigned_area().total_cmp(&b.unsigned_area()))
            .ok_or(Error::DegeneratePolygon)?;
        Self::from_geo_exterior(&largest)
    }

    pub(crate) fn from_geo_exterior(poly: &geo::Polygon<f64>) -> Result<Self> {
        Self::new(poly.exterior().coords().map(|c| Point2D::new(c.x, c.y)).collect())
    }

    pub(crate) fn to_geo(&self) -> geo::Polygon<f64> {
        let ring: Vec<Coord<f64>> = self.vertices.iter().map(|p| Coord { x: p.x, y: p.y }).collect();
        geo::Polygon::new(LineString::from(ring), vec![])
    }

    pub fn vertices(&self) -> &[Point2D] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2D, Point2D)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(&b)).sum()
    }

    pub fn bounding_box(&self) -> AxisAlignedBox {
        let (mut x1, mut y1) = (f64::INFINITY, f64::INFINITY);
        let (mut x2, mut y2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            x1 = x1.min(p.x);
            y1 = y1.min(p.y);
            x2 = x2.max(p.x);
            y2 = y2.max(p.y);
        }
        AxisAlignedBox { x1, y1, x2, y2 }
    }

    /// Even-odd point-in-polygon test; points on the boundary may go either way.
    pub fn contains(&self, p: Point2D) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point2D) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance_sq(p, a, b))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let (a, b, c) = (self.vertices[i], self.vertices[(i + 1) % n], self.vertices[(i + 2) % n]);
            (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x) >= 0.0
        })
    }

    /// True when no two non-adjacent edges intersect.
    pub fn is_simple(&self) -> bool {
        ring_is_simple(&self.vertices)
    }
}

fn normalize_ring(mut vertices: Vec<Point2D>) -> Result<Vec<Point2D>> {
    if vertices.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidGeometry("non-finite polygon vertex".into()));
    }
    vertices.dedup();
    while vertices.len() > 1 && vertices.first() == vertices.last() {
        vertices.pop();
    }
    if vertices.len() < 3 {
        return Err(Error::InvalidGeometry(format!(
            "polygon needs at least 3 distinct vertices, got {}",
            vertices.len()
        )));
    }
    Ok(vertices)
}

fn ring_is_simple(ring: &[Point2D]) -> bool {
    let n = ring.len();
    let edge = |i: usize| (ring[i], ring[(i + 1) % n]);
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (a, b) = edge(i);
            let (c, d) = edge(j);
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

impl TryFrom<Vec<Point2D>> for Polygon {
    type Error = Error;

    fn try_from(vertices: Vec<Point2D>) -> Result<Self> {
        Self::repaired(vertices)
    }
}

impl From<Polygon> for Vec<Point2D> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

fn orient(a: Point2D, b: Point2D, c: Point2D) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point2D, b: Point2D, p: Point2D) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(a: Point2D, b: Point2D, c: Point2D, d: Point2D) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Intersection-over-union of two polygons.
///
/// Convex pairs are clipped exactly with Sutherland-Hodgman; anything else
/// goes through a general boolean intersection, so concave inputs are fine.
pub fn polygon_iou(a: &Polygon, b: &Polygon) -> Result<f64> {
    let (area_a, area_b) = (a.area(), b.area());
    if area_a <= 0.0 || area_b <= 0.0 {
        return Err(Error::DegeneratePolygon);
    }
    if !a.bounding_box().touches(&b.bounding_box()) {
        return Ok(0.0);
    }
    let inter = if a.is_convex() && b.is_convex() {
        clip::convex_intersection_area(a.vertices(), b.vertices())
    } else {
        a.to_geo().intersection(&b.to_geo()).unsigned_area()
    };
    let union = area_a + area_b - inter;
    Ok((inter / union).clamp(0.0, 1.0))
}
