//! Scribble-line annotation data model.
//!
//! Each text instance is an ordered list of clicked points running along the
//! reading direction: two points near the first and last character centers
//! for straight text, a few more along the center line for curved text.
//! Extremely blurry instances are flagged `difficult` and keep their original
//! polygon coordinates in the same `points` field.

mod cost;
mod derive;
mod masks;
mod noise;
mod validate;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use cost::{cost_metrics, CostReport};
pub use derive::{derive_scribble, instance_height};
pub use masks::{make_gt_masks, DEFAULT_THICKNESS};
pub use noise::perturb;
pub use validate::{validate, Rule, Violation};

use crate::error::{Error, Result};
use crate::geometry::{Point2D, Polyline};

/// Schema version written to and required in annotation files.
pub const FORMAT_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScribbleInstance {
    pub id: u64,
    pub points: Vec<Point2D>,
    pub difficult: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_time_ms: Option<u64>,
}

impl ScribbleInstance {
    pub fn new(id: u64, points: Vec<Point2D>) -> Self {
        Self {
            id,
            points,
            difficult: false,
            transcript: None,
            label_time_ms: None,
        }
    }

    pub fn difficult(id: u64, points: Vec<Point2D>) -> Self {
        Self {
            difficult: true,
            ..Self::new(id, points)
        }
    }

    /// The scribble as a polyline, if it has one.
    pub fn polyline(&self) -> Option<Polyline> {
        Polyline::new(self.points.clone()).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageAnnotation {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub instances: Vec<ScribbleInstance>,
}

impl ImageAnnotation {
    pub fn new(image_id: impl Into<String>, width: u32, height: u32) -> Self {
        Self {
            image_id: image_id.into(),
            width,
            height,
            instances: Vec::new(),
        }
    }

    /// Polylines of the non-difficult instances, in instance order.
    pub fn scribbles(&self) -> Vec<Polyline> {
        self.instances
            .iter()
            .filter(|i| !i.difficult)
            .filter_map(ScribbleInstance::polyline)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&AnnotationFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: AnnotationFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported annotation version {:?}",
                file.version
            )));
        }
        Ok(Self {
            image_id: file.image.id,
            width: file.image.width,
            height: file.image.height,
            instances: file.instances,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationFile {
    version: String,
    image: ImageMeta,
    instances: Vec<ScribbleInstance>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImageMeta {
    id: String,
    width: u32,
    height: u32,
}

impl From<&ImageAnnotation> for AnnotationFile {
    fn from(a: &ImageAnnotation) -> Self {
        Self {
            version: FORMAT_VERSION.to_string(),
            image: ImageMeta {
                id: a.image_id.clone(),
                width: a.width,
                height: a.height,
            },
            instances: a.instances.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_layout() {
        let mut ann = ImageAnnotation::new("img_1", 64, 32);
        ann.instances.push(ScribbleInstance::new(
            0,
            vec![Point2D::new(1.5, 2.0), Point2D::new(10.0, 2.0)],
        ));
        let mut hard = ScribbleInstance::difficult(1, vec![Point2D::new(0., 0.)]);
        hard.transcript = Some("x".into());
        hard.label_time_ms = Some(1200);
        ann.instances.push(hard);
        assert_eq!(
            ann.to_json().unwrap(),
            r#"{"version":"1.0","image":{"id":"img_1","width":64,"height":32},"instances":[{"id":0,"points":[[1.5,2.0],[10.0,2.0]],"difficult":false},{"id":1,"points":[[0.0,0.0]],"difficult":true,"transcript":"x","label_time_ms":1200}]}"#
        );
        assert_eq!(ImageAnnotation::from_json(&ann.to_json().unwrap()).unwrap(), ann);
    }

    #[test]
    fn wrong_version_rejected() {
        let text = r#"{"version":"2.0","image":{"id":"a","width":1,"height":1},"instances":[]}"#;
        assert!(matches!(ImageAnnotation::from_json(text), Err(Error::Format(_))));
    }
}
