//! Polygon-level precision, recall and F-measure.
//!
//! Detections are matched one-to-one to regular ground truth greedily in
//! descending IoU order. Difficult ground truth is don't-care: it never
//! counts toward recall, and an unmatched detection that overlaps it is left
//! out of the precision denominator.

use std::ops::{Add, AddAssign};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{polygon_iou, Polygon};
use crate::reconstruction::DetectionResult;

/// Default IoU for a detection to match a ground-truth instance.
pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthInstance {
    pub polygon: Polygon,
    pub difficult: bool,
}

/// Per-image ground-truth file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub image_id: String,
    pub instances: Vec<GroundTruthInstance>,
}

impl GroundTruthFile {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Outcome of matching one image's detections.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matching {
    /// `(detection index, ground-truth index)` pairs.
    pub pairs: Vec<(usize, usize)>,
    /// Unmatched detections covering a difficult instance; not counted.
    pub dont_care: Vec<usize>,
}

/// Greedy one-to-one matching of detections to regular ground truth.
///
/// Pairs with IoU at or above `iou_threshold` are taken in descending IoU
/// order, ties broken by detection then ground-truth index.
pub fn match_polygons(dets: &[Polygon], gts: &[GroundTruthInstance], iou_threshold: f64) -> Matching {
    let iou = |d: &Polygon, g: &Polygon| polygon_iou(d, g).unwrap_or(0.0);
    let mut candidates = Vec::new();
    for (di, d) in dets.iter().enumerate() {
        for (gi, g) in gts.iter().enumerate().filter(|(_, g)| !g.difficult) {
            let v = iou(d, &g.polygon);
            if v >= iou_threshold {
                candidates.push((v, di, gi));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut det_used = vec![false; dets.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut pairs = Vec::new();
    for (_, di, gi) in candidates {
        if !det_used[di] && !gt_used[gi] {
            det_used[di] = true;
            gt_used[gi] = true;
            pairs.push((di, gi));
        }
    }
    pairs.sort_unstable();
    let dont_care = (0..dets.len())
        .filter(|&di| !det_used[di])
        .filter(|&di| {
            gts.iter()
                .filter(|g| g.difficult)
                .any(|g| iou(&dets[di], &g.polygon) >= iou_threshold)
        })
        .collect();
    Matching { pairs, dont_care }
}

pub fn match_detections(dets: &[DetectionResult], gts: &[GroundTruthInstance], iou_threshold: f64) -> Matching {
    let polygons: Vec<Polygon> = dets.iter().map(|d| d.boundary.clone()).collect();
    match_polygons(&polygons, gts, iou_threshold)
}

/// Raw tallies, summed across images before computing the final ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalCounts {
    pub matched: usize,
    /// Detections counted for precision (don't-care excluded).
    pub num_dets: usize,
    /// Non-difficult ground-truth instances.
    pub num_gts: usize,
}

impl Add for EvalCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            matched: self.matched + o.matched,
            num_dets: self.num_dets + o.num_dets,
            num_gts: self.num_gts + o.num_gts,
        }
    }
}

impl AddAssign for EvalCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for EvalCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

pub fn count_polygons(dets: &[Polygon], gts: &[GroundTruthInstance], iou_threshold: f64) -> EvalCounts {
    let m = match_polygons(dets, gts, iou_threshold);
    EvalCounts {
        matched: m.pairs.len(),
        num_dets: dets.len() - m.dont_care.len(),
        num_gts: gts.iter().filter(|g| !g.difficult).count(),
    }
}

/// Precision, recall and F-measure. A ratio with a zero denominator is
/// reported as 0; [`EvalReport::precision_defined`] and
/// [`EvalReport::recall_defined`] tell the cases apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub matched: usize,
    pub num_dets: usize,
    pub num_gts: usize,
}

impl EvalReport {
    pub fn from_counts(c: EvalCounts) -> Self {
        let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let precision = ratio(c.matched, c.num_dets);
        let recall = ratio(c.matched, c.num_gts);
        let f_measure = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f_measure,
            matched: c.matched,
            num_dets: c.num_dets,
            num_gts: c.num_gts,
        }
    }

    pub fn counts(&self) -> EvalCounts {
        EvalCounts {
            matched: self.matched,
            num_dets: self.num_dets,
            num_gts: self.num_gts,
        }
    }

    pub fn precision_defined(&self) -> bool {
        self.num_dets > 0
    }

    pub fn recall_defined(&self) -> bool {
        self.num_gts > 0
    }
}

pub fn evaluate_polygons(dets: &[Polygon], gts: &[GroundTruthInstance], iou_threshold: f64) -> EvalReport {
    EvalReport::from_counts(count_polygons(dets, gts, iou_threshold))
}

pub fn evaluate(dets: &[DetectionResult], gts: &[GroundTruthInstance], iou_threshold: f64) -> EvalReport {
    let polygons: Vec<Polygon> = dets.iter().map(|d| d.boundary.clone()).collect();
    evaluate_polygons(&polygons, gts, iou_threshold)
}
