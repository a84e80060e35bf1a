use std::collections::HashMap;

use rand::Rng;

use super::ImageAnnotation;
use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::seed::image_rng;

/// Simulates annotation deviation.
///
/// Every coordinate of every non-difficult instance moves by `R * H`, with
/// `R` drawn independently per coordinate from `[-offset/2, offset/2]` and
/// `H` the instance height from `heights`. Results are clamped to the image.
/// The draw for a given seed is shared across offsets, so displacements
/// scale linearly with `offset`.
pub fn perturb(
    annotation: &ImageAnnotation,
    offset: f64,
    heights: &HashMap<u64, f64>,
    seed: u64,
) -> Result<ImageAnnotation> {
    if !(offset >= 0.0 && offset.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "offset must be a non-negative number, got {offset}"
        )));
    }
    let mut rng = image_rng(seed, &annotation.image_id);
    let (w, h) = (annotation.width as f64, annotation.height as f64);
    let mut out = annotation.clone();
    for inst in out.instances.iter_mut().filter(|i| !i.difficult) {
        let height = *heights.get(&inst.id).ok_or(Error::MissingHeight(inst.id))?;
        if !(height >= 0.0 && height.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "instance {} height {height} is not a non-negative number",
                inst.id
            )));
        }
        for p in inst.points.iter_mut() {
            let rx = (rng.random::<f64>() - 0.5) * offset;
            let ry = (rng.random::<f64>() - 0.5) * offset;
            if offset > 0.0 {
                *p = Point2D::new((p.x + rx * height).clamp(0.0, w), (p.y + ry * height).clamp(0.0, h));
            }
        }
    }
    Ok(out)
}
