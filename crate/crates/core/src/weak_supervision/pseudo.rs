use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CharClass;
use crate::error::{Error, Result};
use crate::geometry::{box_polyline_intersects, AxisAlignedBox, Polyline};

/// Default score threshold for keeping a pre-trained detection as a label.
pub const DEFAULT_T_PSEUDO: f64 = 0.9;

/// A scored, classified character box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCharBox")]
pub struct CharBox {
    #[serde(rename = "box")]
    pub bbox: AxisAlignedBox,
    pub score: f64,
    pub class: CharClass,
}

#[derive(Deserialize)]
struct RawCharBox {
    #[serde(rename = "box")]
    bbox: AxisAlignedBox,
    score: f64,
    class: CharClass,
}

impl TryFrom<RawCharBox> for CharBox {
    type Error = Error;

    fn try_from(raw: RawCharBox) -> Result<Self> {
        CharBox::new(raw.bbox, raw.score, raw.class)
    }
}

impl CharBox {
    pub fn new(bbox: AxisAlignedBox, score: f64, class: CharClass) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidParameter(format!("score {score} outside [0, 1]")));
        }
        Ok(Self { bbox, score, class })
    }
}

/// Character boxes kept as training targets for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabelSet {
    pub image_id: String,
    pub labels: Vec<CharBox>,
}

/// Per-image character detections file. Pseudo labels are written in the
/// same layout without a map path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionsFile {
    pub image_id: String,
    pub chars: Vec<CharBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub textline_map: Option<String>,
}

impl DetectionsFile {
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

impl From<&PseudoLabelSet> for DetectionsFile {
    fn from(set: &PseudoLabelSet) -> Self {
        Self {
            image_id: set.image_id.clone(),
            chars: set.labels.clone(),
            textline_map: None,
        }
    }
}

/// Filters pre-trained detections down to pseudo labels.
///
/// A box survives when its score is at least `t_pseudo`, its class is a
/// concrete label (not `Unknown` or `Background`), and it touches at least one
/// scribble. Input order is preserved.
pub fn generate_pseudo_labels(
    image_id: &str,
    detections: &[CharBox],
    scribbles: &[Polyline],
    t_pseudo: f64,
) -> PseudoLabelSet {
    let labels = detections
        .iter()
        .filter(|d| d.score >= t_pseudo)
        .filter(|d| !matches!(d.class, CharClass::Unknown | CharClass::Background))
        .filter(|d| scribbles.iter().any(|s| box_polyline_intersects(&d.bbox, s)))
        .copied()
        .collect();
    PseudoLabelSet {
        image_id: image_id.to_string(),
        labels,
    }
}
