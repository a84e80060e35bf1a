use std::f64::consts::TAU;

use geo::Area;

use super::{Point2D, Polygon};
use crate::error::{Error, Result};

/// Chords used to approximate a full circle at round joins.
pub const DEFAULT_CHORDS_PER_CIRCLE: usize = 32;

/// Minkowski sum of `polygon` with a disk of radius `distance`, using
/// [`DEFAULT_CHORDS_PER_CIRCLE`] chords per full circle at round joins.
pub fn buffer_polygon(polygon: &Polygon, distance: f64) -> Result<Polygon> {
    buffer_polygon_with(polygon, distance, DEFAULT_CHORDS_PER_CIRCLE)
}

/// Minkowski sum of `polygon` with a disk of radius `distance`.
///
/// The sum is the union of the polygon, one rectangle of width `distance`
/// swept outward from every edge, and a circular fan at every convex vertex
/// spanning the angle between the adjacent edge normals. Reflex vertices
/// need no fan. Arc points lie on the circle, so the result slightly
/// underestimates the exact area. Holes closed off by the expansion are
/// dropped along with any other interior ring.
pub fn buffer_polygon_with(polygon: &Polygon, distance: f64, chords: usize) -> Result<Polygon> {
    if distance < 0.0 || !distance.is_finite() {
        return Err(Error::NegativeDistance(distance));
    }
    if chords < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 chords per circle, got {chords}"
        )));
    }
    if distance == 0.0 {
        return Ok(polygon.clone());
    }

    let vertices = polygon.vertices();
    let n = vertices.len();
    let normals: Vec<(f64, f64)> = polygon
        .edges()
        .map(|(a, b)| {
            let len = a.distance(&b);
            ((b.y - a.y) / len, -(b.x - a.x) / len)
        })
        .collect();

    let mut pieces: Vec<geo::Polygon<f64>> = Vec::with_capacity(2 * n + 1);
    pieces.push(polygon.to_geo());
    for (i, (a, b)) in polygon.edges().enumerate() {
        let (nx, ny) = normals[i];
        let (ox, oy) = (nx * distance, ny * distance);
        pieces.push(ring_to_geo(&[
            a,
            Point2D::new(a.x + ox, a.y + oy),
            Point2D::new(b.x + ox, b.y + oy),
            b,
        ]));
    }

    let step = TAU / chords as f64;
    for i in 0..n {
        let v = vertices[i];
        let n_in = normals[(i + n - 1) % n];
        let n_out = normals[i];
        let cross = n_in.0 * n_out.1 - n_in.1 * n_out.0;
        let dot = n_in.0 * n_out.0 + n_in.1 * n_out.1;
        // convex vertices turn the outward normal positively
        if cross <= 0.0 {
            continue;
        }
        let sweep = cross.atan2(dot);
        let start = n_in.1.atan2(n_in.0);
        let steps = (sweep / step).ceil().max(1.0) as usize;
        let mut fan = Vec::with_capacity(steps + 2);
        fan.push(v);
        for k in 0..=steps {
            let angle = start + sweep * k as f64 / steps as f64;
            fan.push(Point2D::new(v.x + distance * angle.cos(), v.y + distance * angle.sin()));
        }
        pieces.push(ring_to_geo(&fan));
    }

    let merged = geo::unary_union(&pieces);
    let outer = merged
        .0
        .iter()
        .max_by(|a, b| a.unsigned_area().total_cmp(&b.unsigned_area()))
        .ok_or(Error::DegeneratePolygon)?;
    Polygon::from_geo_exterior(outer)
}

fn ring_to_geo(ring: &[Point2D]) -> geo::Polygon<f64> {
    // orientation-normalized so every piece fills positively
    let mut coords: Vec<geo::Coord<f64>> = ring.iter().map(|p| geo::Coord { x: p.x, y: p.y }).collect();
    let signed: f64 = (0..coords.len())
        .map(|i| {
            let (a, b) = (coords[i], coords[(i + 1) % coords.len()]);
            a.x * b.y - b.x * a.y
        })
        .sum();
    if signed < 0.0 {
        coords.reverse();
    }
    geo::Polygon::new(geo::LineString::from(coords), vec![])
}
