//! Scribbles derived from polygon ground truth. This automates what a human
//! annotator does by hand and exists for conversion and synthetic tests.

use crate::error::{Error, Result};
use crate::geometry::{Point2D, Polygon, Polyline};

/// Height of the rectangle with the same area and perimeter as `polygon`.
///
/// Exact for rectangles and a close estimate for elongated text bands.
/// Falls back to `sqrt(area)` for compact shapes with no such rectangle.
pub fn instance_height(polygon: &Polygon) -> f64 {
    let half_perimeter = polygon.perimeter() / 2.0;
    let area = polygon.area();
    let disc = half_perimeter * half_perimeter - 4.0 * area;
    if disc >= 0.0 {
        (half_perimeter - disc.sqrt()) / 2.0
    } else {
        area.sqrt()
    }
}

/// Principal axis angle of the polygon's area distribution.
fn principal_angle(polygon: &Polygon) -> f64 {
    let (mut a, mut cx, mut cy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, q) in polygon.edges() {
        let cross = p.x * q.y - q.x * p.y;
        a += cross;
        cx += (p.x + q.x) * cross;
        cy += (p.y + q.y) * cross;
        sxx += (p.x * p.x + p.x * q.x + q.x * q.x) * cross;
        syy += (p.y * p.y + p.y * q.y + q.y * q.y) * cross;
        sxy += (p.x * q.y + 2.0 * p.x * p.y + 2.0 * q.x * q.y + q.x * p.y) * cross;
    }
    a /= 2.0;
    cx /= 6.0 * a;
    cy /= 6.0 * a;
    let mxx = sxx / 12.0 / a - cx * cx;
    let myy = syy / 12.0 / a - cy * cy;
    let mxy = sxy / 24.0 / a - cx * cy;
    let scale = (mxx + myy).abs().max(f64::MIN_POSITIVE);
    if (mxx - myy).abs() <= 1e-9 * scale && mxy.abs() <= 1e-9 * scale {
        return 0.0;
    }
    0.5 * (2.0 * mxy).atan2(mxx - myy)
}

/// Estimates a centerline with `n_points` samples strictly inside the polygon.
///
/// The polygon is sliced perpendicular to its principal axis at evenly
/// spaced positions between 25% and 75% of its extent; each sample is the
/// midpoint of the longest inside interval of its slice. For an axis-aligned
/// rectangle and `n_points = 2` this yields the points at 25% and 75% of the
/// width on the horizontal midline.
pub fn derive_scribble(polygon: &Polygon, n_points: usize) -> Result<Polyline> {
    if n_points < 2 {
        return Err(Error::InvalidParameter(format!(
            "a scribble needs at least 2 points, got {n_points}"
        )));
    }
    let theta = principal_angle(polygon);
    let (ux, uy) = if theta == 0.0 {
        (1.0, 0.0)
    } else {
        (theta.cos(), theta.sin())
    };
    let (vx, vy) = (-uy, ux);
    let along = |p: &Point2D| p.x * ux + p.y * uy;
    let across = |p: &Point2D| p.x * vx + p.y * vy;

    let (s_min, s_max) = polygon
        .vertices()
        .iter()
        .map(along)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
    let extent = s_max - s_min;

    let mut points = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let frac = 0.25 + 0.5 * i as f64 / (n_points - 1) as f64;
        let s = s_min + frac * extent;
        let mut crossings: Vec<f64> = polygon
            .edges()
            .filter_map(|(p, q)| {
                let (sp, sq) = (along(&p), along(&q));
                if (sp > s) == (sq > s) {
                    return None;
                }
                let t = (s - sp) / (sq - sp);
                Some(across(&p) + t * (across(&q) - across(&p)))
            })
            .collect();
        crossings.sort_by(f64::total_cmp);
        let (lo, hi) = crossings
            .chunks_exact(2)
            .map(|c| (c[0], c[1]))
            .max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
            .ok_or(Error::PolygonTooThin)?;
        if hi - lo <= 1e-9 * extent.max(1.0) {
            return Err(Error::PolygonTooThin);
        }
        let t = (lo + hi) / 2.0;
        points.push(Point2D::new(s * ux + t * vx, s * uy + t * vy));
    }
    Polyline::new(points).map_err(|_| Error::PolygonTooThin)
}
