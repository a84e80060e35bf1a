use super::{validate, ImageAnnotation, ScribbleInstance};
use crate::error::{Error, Result};
use crate::geometry::{rasterize_polyline, BinaryMask, Point2D, Polygon};

/// Stroke width of scribble lines on the text-line ground-truth map.
pub const DEFAULT_THICKNESS: f64 = 5.0;

/// Builds the text-line training target and the ignore mask.
///
/// The target is the union of all non-difficult scribbles drawn at
/// `thickness`. Difficult instances fill the ignore mask: as a polygon when
/// they carry three or more points, otherwise as a stroke. Ignored pixels are
/// removed from the target.
pub fn make_gt_masks(annotation: &ImageAnnotation, thickness: f64) -> Result<(BinaryMask, BinaryMask)> {
    let violations = validate(annotation);
    if !violations.is_empty() {
        return Err(Error::InvalidAnnotation(violations.len()));
    }
    let (w, h) = (annotation.width as usize, annotation.height as usize);
    let mut target = BinaryMask::new(w, h)?;
    let mut ignore = BinaryMask::new(w, h)?;
    for inst in &annotation.instances {
        if inst.difficult {
            ignore.union_with(&difficult_region(inst, thickness, w, h)?);
        } else {
            let line = inst.polyline().expect("validated scribble is a polyline");
            target.union_with(&rasterize_polyline(&line, thickness, w, h)?);
        }
    }
    target.subtract(&ignore);
    Ok((target, ignore))
}

fn difficult_region(inst: &ScribbleInstance, thickness: f64, w: usize, h: usize) -> Result<BinaryMask> {
    if inst.points.len() >= 3 {
        if let Ok(poly) = Polygon::repaired(inst.points.clone()) {
            let mut mask = BinaryMask::new(w, h)?;
            let bb = poly.bounding_box();
            let (c0, c1) = (bb.x1.floor().max(0.0) as usize, (bb.x2.ceil().max(0.0) as usize).min(w));
            let (r0, r1) = (bb.y1.floor().max(0.0) as usize, (bb.y2.ceil().max(0.0) as usize).min(h));
            for row in r0..r1 {
                for col in c0..c1 {
                    if poly.contains(Point2D::new(col as f64 + 0.5, row as f64 + 0.5)) {
                        mask.set(col, row, true);
                    }
                }
            }
            return Ok(mask);
        }
    }
    match inst.polyline() {
        Some(line) => rasterize_polyline(&line, thickness, w, h),
        None => {
            // a lone point (or coincident points) becomes a dot
            let p = inst.points[0];
            let mut mask = BinaryMask::new(w, h)?;
            let r_sq = (thickness / 2.0).powi(2);
            for row in 0..h {
                for col in 0..w {
                    let (dx, dy) = (col as f64 + 0.5 - p.x, row as f64 + 0.5 - p.y);
                    if dx * dx + dy * dy <= r_sq {
                        mask.set(col, row, true);
                    }
                }
            }
            Ok(mask)
        }
    }
}
