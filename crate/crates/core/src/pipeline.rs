//! Per-image composition of the stages: pseudo labels, grouping,
//! reconstruction and evaluation.

use crate::annotation::ImageAnnotation;
use crate::error::{Error, Result};
use crate::evaluation::{count_polygons, EvalCounts, EvalReport, GroundTruthInstance, DEFAULT_IOU_THRESHOLD};
use crate::geometry::RasterGrid;
use crate::reconstruction::{detect_text, DetectionResult, ReconstructionConfig};
use crate::synth::{ideal_outputs, simulate_detector, NoiseConfig, SyntheticScene};
use crate::weak_supervision::{generate_pseudo_labels, CharBox, PseudoLabelSet, DEFAULT_T_PSEUDO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub t_pseudo: f64,
    pub reconstruction: ReconstructionConfig,
    pub match_iou: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            t_pseudo: DEFAULT_T_PSEUDO,
            reconstruction: ReconstructionConfig::default(),
            match_iou: DEFAULT_IOU_THRESHOLD,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.t_pseudo) {
            return Err(Error::InvalidParameter(format!(
                "t_pseudo {} outside [0, 1]",
                self.t_pseudo
            )));
        }
        if !(self.match_iou > 0.0 && self.match_iou < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "match IoU {} outside (0, 1)",
                self.match_iou
            )));
        }
        self.reconstruction.validate()
    }
}

/// Everything known about one image.
#[derive(Debug, Clone, Copy)]
pub struct ImageInputs<'a> {
    pub image_id: &'a str,
    pub chars: &'a [CharBox],
    pub map: &'a RasterGrid,
    /// Scribbles, when present, turn the detections into pseudo labels
    /// before grouping.
    pub annotation: Option<&'a ImageAnnotation>,
    pub gts: &'a [GroundTruthInstance],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageOutcome {
    pub pseudo: Option<PseudoLabelSet>,
    pub detections: Vec<DetectionResult>,
    pub counts: EvalCounts,
}

pub fn run_image(inputs: ImageInputs<'_>, config: &PipelineConfig) -> Result<ImageOutcome> {
    config.validate()?;
    let pseudo = inputs
        .annotation
        .map(|ann| generate_pseudo_labels(inputs.image_id, inputs.chars, &ann.scribbles(), config.t_pseudo));
    let chars = pseudo.as_ref().map_or(inputs.chars, |p| &p.labels[..]);
    let detections = detect_text(chars, inputs.map, &config.reconstruction)?;
    let boundaries: Vec<_> = detections.iter().map(|d| d.boundary.clone()).collect();
    let counts = count_polygons(&boundaries, inputs.gts, config.match_iou);
    Ok(ImageOutcome {
        pseudo,
        detections,
        counts,
    })
}

/// Runs a synthetic scene through the detector simulator and the pipeline.
/// `noise = None` uses the ideal outputs.
pub fn run_scene(scene: &SyntheticScene, noise: Option<&NoiseConfig>, config: &PipelineConfig) -> Result<ImageOutcome> {
    let ideal = ideal_outputs(scene)?;
    let (chars, map) = match noise {
        Some(n) => simulate_detector(scene, n)?,
        None => (ideal.detections.clone(), ideal.map.clone()),
    };
    run_image(
        ImageInputs {
            image_id: &scene.image_id,
            chars: &chars,
            map: &map,
            annotation: Some(&ideal.annotation),
            gts: &ideal.gts,
        },
        config,
    )
}

/// Micro-averaged report over a corpus.
pub fn evaluate_corpus(
    scenes: &[SyntheticScene],
    noise: Option<&NoiseConfig>,
    config: &PipelineConfig,
) -> Result<EvalReport> {
    let mut total = EvalCounts::default();
    for scene in scenes {
        total += run_scene(scene, noise, config)?.counts;
    }
    Ok(EvalReport::from_counts(total))
}
