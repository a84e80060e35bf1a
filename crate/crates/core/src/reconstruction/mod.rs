//! Inference-side boundary reconstruction.
//!
//! The text-line map is binarized and split into connected regions. Each
//! confident character box joins the region it overlaps most, the group's
//! mean character size `D = mean(sqrt(h * w))` is computed, and the region
//! contour is expanded by `rho * D` to recover the text boundary. Because
//! `D` is an average, a few missing or noisy characters barely move it.

mod format;

use std::cmp::Ordering;

pub use format::{read_tlm, write_tlm, ResultEntry, ResultsFile, TLM_MAGIC};

use crate::error::{Error, Result};
use crate::geometry::{
    binarize, box_mask_overlap_area, buffer_polygon, connected_components, extract_contour, BinaryMask, Polygon,
    RasterGrid,
};
use crate::weak_supervision::{CharBox, CharClass, ClassMode};

/// Default score gate for character boxes at inference.
pub const DEFAULT_T_INFER: f64 = 0.5;
/// Default binarization threshold for the text-line map.
pub const DEFAULT_BIN_THRESHOLD: f64 = 0.2;
/// Regions smaller than this many pixels are treated as speckle.
pub const MIN_REGION_PIXELS: usize = 4;

/// A connected region of the binarized text-line map.
#[derive(Debug, Clone, PartialEq)]
pub struct TextLineRegion {
    pub region_id: u32,
    pub mask: BinaryMask,
    pub contour: Polygon,
}

/// Character boxes assigned to one region.
#[derive(Debug, Clone, PartialEq)]
pub struct CharGroup {
    pub region_id: u32,
    pub members: Vec<CharBox>,
}

/// One reconstructed text instance.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub boundary: Polygon,
    pub region_id: u32,
    pub transcript: Option<String>,
    pub char_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionConfig {
    pub t_infer: f64,
    pub bin_threshold: f64,
    /// Multiplier on the expansion distance; 1.0 expands by the full `D`.
    pub expansion_factor: f64,
    /// Attach left-to-right transcripts read under this taxonomy.
    pub transcript_mode: Option<ClassMode>,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            t_infer: DEFAULT_T_INFER,
            bin_threshold: DEFAULT_BIN_THRESHOLD,
            expansion_factor: 1.0,
            transcript_mode: None,
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.t_infer) {
            return Err(Error::InvalidParameter(format!(
                "t_infer {} outside [0, 1]",
                self.t_infer
            )));
        }
        if !(0.0..=1.0).contains(&self.bin_threshold) {
            return Err(Error::InvalidParameter(format!(
                "binarization threshold {} outside [0, 1]",
                self.bin_threshold
            )));
        }
        if !(self.expansion_factor > 0.0 && self.expansion_factor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "expansion factor {} must be positive",
                self.expansion_factor
            )));
        }
        Ok(())
    }
}

/// Binarizes the map and returns one region per connected component of at
/// least [`MIN_REGION_PIXELS`] pixels, numbered in row-major discovery order.
pub fn extract_textlines(map: &RasterGrid, bin_threshold: f64) -> Result<Vec<TextLineRegion>> {
    let binary = binarize(map, bin_threshold);
    connected_components(&binary)
        .into_iter()
        .filter(|c| c.count() >= MIN_REGION_PIXELS)
        .enumerate()
        .map(|(i, mask)| {
            let contour = extract_contour(&mask)?;
            Ok(TextLineRegion {
                region_id: i as u32,
                mask,
                contour,
            })
        })
        .collect()
}

fn canonical_order(a: &CharBox, b: &CharBox) -> Ordering {
    let key = |c: &CharBox| [c.bbox.x1, c.bbox.y1, c.bbox.x2, c.bbox.y2, c.score];
    key(a)
        .iter()
        .zip(key(b).iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.class.to_string().cmp(&b.class.to_string()))
}

/// Drops boxes scoring below `t_infer` and assigns the rest to the region
/// with the largest pixel overlap (lowest id on ties). Boxes overlapping no
/// region are dropped. Groups come back ordered by region id with members
/// in a canonical order, so input order does not matter.
pub fn group_chars(chars: &[CharBox], regions: &[TextLineRegion], t_infer: f64) -> Vec<CharGroup> {
    let mut by_id: Vec<&TextLineRegion> = regions.iter().collect();
    by_id.sort_by_key(|r| r.region_id);
    let mut groups: Vec<CharGroup> = by_id
        .iter()
        .map(|r| CharGroup {
            region_id: r.region_id,
            members: Vec::new(),
        })
        .collect();
    for c in chars.iter().filter(|c| c.score >= t_infer) {
        let mut best: Option<(usize, f64)> = None;
        for (slot, region) in by_id.iter().enumerate() {
            if !c.bbox.touches(&region.contour.bounding_box()) {
                continue;
            }
            let overlap = box_mask_overlap_area(&c.bbox, &region.mask);
            if overlap > 0.0 && best.map_or(true, |(_, b)| overlap > b) {
                best = Some((slot, overlap));
            }
        }
        if let Some((slot, _)) = best {
            groups[slot].members.push(*c);
        }
    }
    groups.retain(|g| !g.members.is_empty());
    for g in &mut groups {
        g.members.sort_by(canonical_order);
    }
    groups
}

/// Mean of `sqrt(h * w)` over the group's boxes.
pub fn expansion_distance(group: &CharGroup) -> Result<f64> {
    if group.members.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let sum: f64 = group
        .members
        .iter()
        .map(|c| (c.bbox.height() * c.bbox.width()).sqrt())
        .sum();
    Ok(sum / group.members.len() as f64)
}

/// Reads the group's characters left to right by box center. Unknown renders
/// as `?`, Foreground (and every member under `BF`) as `#`.
pub fn naive_transcript(group: &CharGroup, mode: ClassMode) -> String {
    let mut members: Vec<&CharBox> = group.members.iter().collect();
    members.sort_by(|a, b| {
        let (ca, cb) = (a.bbox.center(), b.bbox.center());
        ca.x.total_cmp(&cb.x).then(ca.y.total_cmp(&cb.y))
    });
    members
        .into_iter()
        .filter_map(|c| match (mode, c.class) {
            (ClassMode::Bf, _) | (_, CharClass::Foreground) => Some('#'),
            (_, CharClass::Digit(d)) => Some((b'0' + d) as char),
            (_, CharClass::Letter(l)) => Some(l),
            (_, CharClass::Unknown) => Some('?'),
            (_, CharClass::Background) => None,
        })
        .collect()
}

/// Expands each grouped region's contour by `expansion_factor * D`.
/// Regions without characters produce nothing.
pub fn reconstruct(
    regions: &[TextLineRegion],
    groups: &[CharGroup],
    config: &ReconstructionConfig,
) -> Result<Vec<DetectionResult>> {
    config.validate()?;
    let mut ordered: Vec<&CharGroup> = groups.iter().collect();
    ordered.sort_by_key(|g| g.region_id);
    ordered
        .into_iter()
        .map(|group| {
            let region = regions
                .iter()
                .find(|r| r.region_id == group.region_id)
                .ok_or(Error::UnknownRegion(group.region_id))?;
            let distance = config.expansion_factor * expansion_distance(group)?;
            Ok(DetectionResult {
                boundary: buffer_polygon(&region.contour, distance)?,
                region_id: group.region_id,
                transcript: config.transcript_mode.map(|m| naive_transcript(group, m)),
                char_count: group.members.len(),
            })
        })
        .collect()
}

/// Full inference post-processing for one image: map and boxes in, text
/// boundaries out.
pub fn detect_text(chars: &[CharBox], map: &RasterGrid, config: &ReconstructionConfig) -> Result<Vec<DetectionResult>> {
    config.validate()?;
    let regions = extract_textlines(map, config.bin_threshold)?;
    let groups = group_chars(chars, &regions, config.t_infer);
    reconstruct(&regions, &groups, config)
}
