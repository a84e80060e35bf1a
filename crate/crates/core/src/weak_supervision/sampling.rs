use super::PseudoLabelSet;
use crate::geometry::{box_polyline_intersects, AxisAlignedBox, Polygon, Polyline};

/// Default IoU at which a proposal counts as matching a pseudo label.
pub const DEFAULT_MATCH_IOU: f64 = 0.5;

/// A coarse character proposal from the region proposal stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub bbox: AxisAlignedBox,
}

/// Training role of a proposal on real (scribble-annotated) data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleDecision {
    /// Matched the pseudo label at this index.
    Positive(usize),
    Negative,
    Ignored,
}

/// Closed box/polygon intersection.
pub fn box_polygon_intersects(bbox: &AxisAlignedBox, polygon: &Polygon) -> bool {
    if !bbox.touches(&polygon.bounding_box()) {
        return false;
    }
    polygon.vertices().iter().any(|v| bbox.contains(*v))
        || polygon.contains(bbox.center())
        || polygon.edges().any(|(a, b)| bbox.intersects_segment(a, b))
}

/// Online proposal sampling for real images.
///
/// A proposal is positive when its best IoU with a pseudo label reaches
/// `match_iou` (ties go to the lowest label index). Otherwise it is negative
/// only when it also avoids every scribble and every difficult region;
/// unmatched proposals near text may be unlabeled characters and are ignored.
pub fn sample_proposals(
    proposals: &[Proposal],
    labels: &PseudoLabelSet,
    scribbles: &[Polyline],
    difficult_regions: &[Polygon],
    match_iou: f64,
) -> Vec<SampleDecision> {
    proposals
        .iter()
        .map(|p| {
            let best = labels
                .labels
                .iter()
                .enumerate()
                .map(|(i, l)| (i, p.bbox.iou(&l.bbox)))
                .fold(None, |best: Option<(usize, f64)>, (i, iou)| match best {
                    Some((_, b)) if b >= iou => best,
                    _ => Some((i, iou)),
                });
            if let Some((index, iou)) = best {
                if iou >= match_iou {
                    return SampleDecision::Positive(index);
                }
            }
            let near_text = scribbles.iter().any(|s| box_polyline_intersects(&p.bbox, s))
                || difficult_regions.iter().any(|r| box_polygon_intersects(&p.bbox, r));
            if near_text {
                SampleDecision::Ignored
            } else {
                SampleDecision::Negative
            }
        })
        .collect()
}
