//! Synthetic scenes and a noisy detector simulator.
//!
//! Scenes stand in for benchmark images: each text instance has a ground-truth
//! polygon, a centerline scribble and exact character boxes. The simulator
//! degrades those into what a pre-trained detector would emit, so the whole
//! pipeline can run without a network.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::annotation::{ImageAnnotation, ScribbleInstance, DEFAULT_THICKNESS};
use crate::error::{Error, Result};
use crate::evaluation::{GroundTruthFile, GroundTruthInstance};
use crate::geometry::{
    box_polyline_intersects, rasterize_polyline, AxisAlignedBox, BinaryMask, Point2D, Polygon, Polyline, RasterGrid,
};
use crate::seed::image_rng;
use crate::weak_supervision::{CharBox, CharClass, DetectionsFile};

/// Layout of a text instance, after the three labeling cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Horizontal,
    Oriented,
    Curved,
}

/// Relative weights of the instance shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeMix {
    pub horizontal: f64,
    pub oriented: f64,
    pub curved: f64,
}

impl ShapeMix {
    pub const EVEN: ShapeMix = ShapeMix {
        horizontal: 1.0,
        oriented: 1.0,
        curved: 1.0,
    };

    pub const HORIZONTAL: ShapeMix = ShapeMix {
        horizontal: 1.0,
        oriented: 0.0,
        curved: 0.0,
    };

    fn pick(&self, rng: &mut ChaCha8Rng) -> Shape {
        let total = self.horizontal + self.oriented + self.curved;
        let u = rng.random::<f64>() * total;
        if u < self.horizontal {
            Shape::Horizontal
        } else if u < self.horizontal + self.oriented {
            Shape::Oriented
        } else {
            Shape::Curved
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub width: u32,
    pub height: u32,
    pub n_instances: usize,
    pub shape_mix: ShapeMix,
    pub difficult_prob: f64,
    /// Inclusive range of characters per instance.
    pub chars_per_instance: (usize, usize),
    /// Range of character heights in pixels.
    pub char_height: (f64, f64),
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            n_instances: 6,
            shape_mix: ShapeMix::EVEN,
            difficult_prob: 0.1,
            chars_per_instance: (2, 4),
            char_height: (16.0, 32.0),
        }
    }
}

impl SceneConfig {
    fn validate(&self) -> Result<()> {
        let mix = &self.shape_mix;
        if self.n_instances == 0 {
            return Err(Error::InvalidParameter("a scene needs at least one instance".into()));
        }
        if [mix.horizontal, mix.oriented, mix.curved].iter().any(|w| !(*w >= 0.0))
            || mix.horizontal + mix.oriented + mix.curved <= 0.0
        {
            return Err(Error::InvalidParameter(
                "shape weights must be non-negative with a positive sum".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.difficult_prob) {
            return Err(Error::InvalidParameter("difficult_prob outside [0, 1]".into()));
        }
        let (lo, hi) = self.chars_per_instance;
        if lo < 2 || hi < lo {
            return Err(Error::InvalidParameter(
                "chars_per_instance must be a range starting at 2 or more".into(),
            ));
        }
        let (hlo, hhi) = self.char_height;
        if !(hlo > 0.0 && hhi >= hlo) {
            return Err(Error::InvalidParameter("char_height must be a positive range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticInstance {
    pub shape: Shape,
    pub gt_polygon: Polygon,
    pub centerline: Polyline,
    /// Exact boxes, score 1.0, in reading order.
    pub char_boxes: Vec<CharBox>,
    pub char_height: f64,
    pub difficult: bool,
}

impl SyntheticInstance {
    pub fn transcript(&self) -> String {
        self.char_boxes.iter().map(|c| c.class.to_string()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub instances: Vec<SyntheticInstance>,
}

/// Maps `(along, across)` text coordinates to image coordinates.
enum Frame {
    Straight {
        origin: Point2D,
        angle: f64,
    },
    Arc {
        center: Point2D,
        radius: f64,
        start: f64,
        turn: f64,
    },
}

impl Frame {
    fn point(&self, s: f64, t: f64) -> Point2D {
        match *self {
            Frame::Straight { origin, angle } => {
                let (sin, cos) = angle.sin_cos();
                Point2D::new(origin.x + s * cos - t * sin, origin.y + s * sin + t * cos)
            }
            Frame::Arc {
                center,
                radius,
                start,
                turn,
            } => {
                let a = start + turn * s / radius;
                let r = radius + turn * t;
                Point2D::new(center.x + r * a.cos(), center.y + r * a.sin())
            }
        }
    }
}

/// Expansion factor tuned once on seeded synthetic corpora. Regions here are
/// 5-pixel centerline strokes, so the literal factor of 1 overshoots.
pub const SYNTHETIC_EXPANSION_FACTOR: f64 = 0.47;

const GT_HALF_HEIGHT: f64 = 0.55;
const GT_END_PAD: f64 = 0.05;
const PLACEMENT_GAP: f64 = 12.0;
const PLACEMENT_ATTEMPTS: usize = 400;

fn random_class(rng: &mut ChaCha8Rng) -> CharClass {
    let k = rng.random_range(0..36u8);
    if k < 10 {
        CharClass::Digit(k)
    } else {
        CharClass::Letter((b'a' + k - 10) as char)
    }
}

fn build_instance(rng: &mut ChaCha8Rng, shape: Shape, config: &SceneConfig) -> Result<SyntheticInstance> {
    let h = rng.random_range(config.char_height.0..=config.char_height.1);
    let n = rng.random_range(config.chars_per_instance.0..=config.chars_per_instance.1);
    let widths: Vec<f64> = (0..n).map(|_| h * rng.random_range(0.75..1.0)).collect();
    let gap = 0.1 * h;
    let mut offsets = vec![0.0];
    for k in 1..n {
        offsets.push(offsets[k - 1] + (widths[k - 1] + widths[k]) / 2.0 + gap);
    }
    let length = offsets[n - 1];
    let s_lo = -widths[0] / 2.0 - GT_END_PAD * h;
    let s_hi = length + widths[n - 1] / 2.0 + GT_END_PAD * h;
    let half = GT_HALF_HEIGHT * h;

    let frame = match shape {
        Shape::Horizontal => Frame::Straight {
            origin: Point2D::new(0.0, 0.0),
            angle: 0.0,
        },
        Shape::Oriented => {
            let magnitude = rng.random_range(10.0f64..45.0).to_radians();
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Frame::Straight {
                origin: Point2D::new(0.0, 0.0),
                angle: sign * magnitude,
            }
        }
        Shape::Curved => {
            let radius = h * rng.random_range(2.5..5.0);
            // arch over the top of the circle or sag below it, reading left to right
            let (start, turn) = if rng.random::<bool>() {
                (-PI / 2.0 - length / radius / 2.0, 1.0)
            } else {
                (PI / 2.0 + length / radius / 2.0, -1.0)
            };
            Frame::Arc {
                center: Point2D::new(0.0, 0.0),
                radius,
                start,
                turn,
            }
        }
    };

    let (centerline_pts, gt_pts) = match frame {
        Frame::Straight { .. } => (
            vec![frame.point(0.0, 0.0), frame.point(length, 0.0)],
            vec![
                frame.point(s_lo, -half),
                frame.point(s_hi, -half),
                frame.point(s_hi, half),
                frame.point(s_lo, half),
            ],
        ),
        Frame::Arc { radius, .. } => {
            let sweep = length / radius;
            let m = ((sweep / 8f64.to_radians()).ceil() as usize + 1).max(4);
            let line = (0..m)
                .map(|j| frame.point(length * j as f64 / (m - 1) as f64, 0.0))
                .collect();
            let samples = 16;
            let along = |j: usize| s_lo + (s_hi - s_lo) * j as f64 / (samples - 1) as f64;
            let mut ring: Vec<Point2D> = (0..samples).map(|j| frame.point(along(j), -half)).collect();
            ring.extend((0..samples).rev().map(|j| frame.point(along(j), half)));
            (line, ring)
        }
    };
    let centerline = Polyline::new(centerline_pts)?;
    let gt_polygon = Polygon::new(gt_pts)?;

    let scale = centerline.length() / length;
    let mut char_boxes = Vec::with_capacity(n);
    for k in 0..n {
        let center = match frame {
            Frame::Straight { .. } => frame.point(offsets[k], 0.0),
            Frame::Arc { .. } => centerline.point_at(offsets[k] * scale),
        };
        // the box keeps the glyph's own size rather than the hull of the
        // rotated glyph, as a character detector reports it
        char_boxes.push(CharBox::new(
            AxisAlignedBox::from_center(center, widths[k], h)?,
            1.0,
            random_class(rng),
        )?);
    }
    let difficult = rng.random::<f64>() < config.difficult_prob;
    Ok(SyntheticInstance {
        shape,
        gt_polygon,
        centerline,
        char_boxes,
        char_height: h,
        difficult,
    })
}

fn translate(inst: &SyntheticInstance, dx: f64, dy: f64) -> Result<SyntheticInstance> {
    let shift = |p: &Point2D| Point2D::new(p.x + dx, p.y + dy);
    Ok(SyntheticInstance {
        gt_polygon: Polygon::new(inst.gt_polygon.vertices().iter().map(shift).collect())?,
        centerline: Polyline::new(inst.centerline.points().iter().map(shift).collect())?,
        char_boxes: inst
            .char_boxes
            .iter()
            .map(|c| {
                let b = c.bbox;
                Ok(CharBox {
                    bbox: AxisAlignedBox::new(b.x1 + dx, b.y1 + dy, b.x2 + dx, b.y2 + dy)?,
                    ..*c
                })
            })
            .collect::<Result<_>>()?,
        ..inst.clone()
    })
}

fn footprint(inst: &SyntheticInstance) -> AxisAlignedBox {
    let mut bb = inst.gt_polygon.bounding_box();
    for c in &inst.char_boxes {
        bb.x1 = bb.x1.min(c.bbox.x1);
        bb.y1 = bb.y1.min(c.bbox.y1);
        bb.x2 = bb.x2.max(c.bbox.x2);
        bb.y2 = bb.y2.max(c.bbox.y2);
    }
    bb
}

/// Generates a scene deterministically from `seed` and `image_id`.
/// Instances never overlap and keep a gap between their footprints.
pub fn generate_scene(image_id: &str, seed: u64, config: &SceneConfig) -> Result<SyntheticScene> {
    config.validate()?;
    let mut rng = image_rng(seed, image_id);
    let (cw, ch) = (config.width as f64, config.height as f64);
    let mut placed: Vec<(SyntheticInstance, AxisAlignedBox)> = Vec::new();
    for index in 0..config.n_instances {
        let mut done = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let shape = config.shape_mix.pick(&mut rng);
            let local = build_instance(&mut rng, shape, config)?;
            let bb = footprint(&local);
            let margin = 2.0;
            let (span_x, span_y) = (cw - bb.width() - 2.0 * margin, ch - bb.height() - 2.0 * margin);
            if span_x <= 0.0 || span_y <= 0.0 {
                continue;
            }
            let dx = margin - bb.x1 + rng.random::<f64>() * span_x;
            let dy = margin - bb.y1 + rng.random::<f64>() * span_y;
            let moved = translate(&local, dx, dy)?;
            let fp = footprint(&moved);
            let grown = AxisAlignedBox {
                x1: fp.x1 - PLACEMENT_GAP,
                y1: fp.y1 - PLACEMENT_GAP,
                x2: fp.x2 + PLACEMENT_GAP,
                y2: fp.y2 + PLACEMENT_GAP,
            };
            if placed.iter().all(|(_, other)| !grown.touches(other)) {
                placed.push((moved, fp));
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::Scene(format!(
                "no room for instance {index} on a {}x{} canvas",
                config.width, config.height
            )));
        }
    }
    Ok(SyntheticScene {
        image_id: image_id.to_string(),
        width: config.width,
        height: config.height,
        instances: placed.into_iter().map(|(i, _)| i).collect(),
    })
}

/// Image id of the `index`-th scene in a generated corpus.
pub fn corpus_image_id(index: usize) -> String {
    format!("img_{index:04}")
}

/// `n_images` scenes sharing one seed; each image's stream is keyed by its id.
pub fn generate_corpus(seed: u64, n_images: usize, config: &SceneConfig) -> Result<Vec<SyntheticScene>> {
    (0..n_images)
        .map(|i| generate_scene(&corpus_image_id(i), seed, config))
        .collect()
}

/// What a perfect detector and a careful annotator would produce.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealOutputs {
    pub detections: Vec<CharBox>,
    pub map: RasterGrid,
    pub annotation: ImageAnnotation,
    pub gts: Vec<GroundTruthInstance>,
}

impl SyntheticScene {
    /// Centerline mask of the non-difficult instances.
    pub fn centerline_mask(&self) -> Result<BinaryMask> {
        let (w, h) = (self.width as usize, self.height as usize);
        let mut mask = BinaryMask::new(w, h)?;
        for inst in self.instances.iter().filter(|i| !i.difficult) {
            mask.union_with(&rasterize_polyline(&inst.centerline, DEFAULT_THICKNESS, w, h)?);
        }
        Ok(mask)
    }

    pub fn annotation(&self) -> ImageAnnotation {
        let mut ann = ImageAnnotation::new(self.image_id.clone(), self.width, self.height);
        ann.instances = self
            .instances
            .iter()
            .enumerate()
            .map(|(i, inst)| {
                let mut s = if inst.difficult {
                    ScribbleInstance::difficult(i as u64, inst.gt_polygon.vertices().to_vec())
                } else {
                    ScribbleInstance::new(i as u64, inst.centerline.points().to_vec())
                };
                s.transcript = Some(inst.transcript());
                s
            })
            .collect();
        ann
    }

    pub fn ground_truth(&self) -> Vec<GroundTruthInstance> {
        self.instances
            .iter()
            .map(|i| GroundTruthInstance {
                polygon: i.gt_polygon.clone(),
                difficult: i.difficult,
            })
            .collect()
    }

    pub fn ground_truth_file(&self) -> GroundTruthFile {
        GroundTruthFile {
            image_id: self.image_id.clone(),
            instances: self.ground_truth(),
        }
    }

    pub fn detections_file(&self, chars: Vec<CharBox>, map_path: Option<String>) -> DetectionsFile {
        DetectionsFile {
            image_id: self.image_id.clone(),
            chars,
            textline_map: map_path,
        }
    }
}

pub fn ideal_outputs(scene: &SyntheticScene) -> Result<IdealOutputs> {
    Ok(IdealOutputs {
        detections: scene
            .instances
            .iter()
            .flat_map(|i| i.char_boxes.iter().copied())
            .collect(),
        map: RasterGrid::from_mask(&scene.centerline_mask()?, 1.0, 0.0)?,
        annotation: scene.annotation(),
        gts: scene.ground_truth(),
    })
}

/// Imperfections applied by [`simulate_detector`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Probability of missing each true character.
    pub drop_prob: f64,
    /// Corner jitter as a fraction of box width/height.
    pub jitter_frac: f64,
    /// Expected number of spurious `Unknown` boxes per image.
    pub spurious_per_image: f64,
    /// Scores are drawn uniformly from `[score_floor, 1]`.
    pub score_floor: f64,
    /// Box-blur radius applied to the text-line map, in pixels.
    pub map_blur_radius: usize,
    pub seed: u64,
}

impl NoiseConfig {
    /// A detector that reproduces the ideal outputs exactly.
    pub fn none(seed: u64) -> Self {
        Self {
            drop_prob: 0.0,
            jitter_frac: 0.0,
            spurious_per_image: 0.0,
            score_floor: 1.0,
            map_blur_radius: 0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_prob) || !(0.0..=1.0).contains(&self.score_floor) {
            return Err(Error::InvalidParameter(
                "drop_prob and score_floor must lie in [0, 1]".into(),
            ));
        }
        if !(self.jitter_frac >= 0.0 && self.jitter_frac.is_finite()) {
            return Err(Error::InvalidParameter("jitter_frac must be non-negative".into()));
        }
        if !(self.spurious_per_image >= 0.0 && self.spurious_per_image.is_finite()) {
            return Err(Error::InvalidParameter(
                "spurious_per_image must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

fn box_blur(grid: &RasterGrid, radius: usize) -> Result<RasterGrid> {
    if radius == 0 {
        return Ok(grid.clone());
    }
    let (w, h) = (grid.width(), grid.height());
    let pass = |src: &[f64], horizontal: bool| -> Vec<f64> {
        let mut out = vec![0.0; w * h];
        for r in 0..h {
            for c in 0..w {
                let (pos, len) = if horizontal { (c, w) } else { (r, h) };
                let (lo, hi) = (pos.saturating_sub(radius), (pos + radius).min(len - 1));
                let sum: f64 = (lo..=hi)
                    .map(|k| if horizontal { src[r * w + k] } else { src[k * w + c] })
                    .sum();
                out[r * w + c] = sum / (hi - lo + 1) as f64;
            }
        }
        out
    };
    let blurred = pass(&pass(grid.values(), true), false);
    let max = blurred.iter().copied().fold(0.0, f64::max);
    let values = if max > 0.0 {
        blurred.iter().map(|v| (v / max).clamp(0.0, 1.0)).collect()
    } else {
        blurred
    };
    RasterGrid::new(w, h, values)
}

fn jittered(bbox: &AxisAlignedBox, frac: f64, rng: &mut ChaCha8Rng) -> Result<AxisAlignedBox> {
    let (w, h) = (bbox.width(), bbox.height());
    let mut jit = |size: f64| (rng.random::<f64>() * 2.0 - 1.0) * frac * size;
    let (x1, y1) = (bbox.x1 + jit(w), bbox.y1 + jit(h));
    let (x2, y2) = (bbox.x2 + jit(w), bbox.y2 + jit(h));
    let (x1, x2) = (x1.min(x2), x1.max(x2).max(x1.min(x2) + 0.5));
    let (y1, y2) = (y1.min(y2), y1.max(y2).max(y1.min(y2) + 0.5));
    AxisAlignedBox::new(x1, y1, x2, y2)
}

/// Degrades the ideal outputs as a pre-trained detector would.
///
/// Every true box is dropped with `drop_prob`, has each corner coordinate
/// jittered uniformly within `jitter_frac` of its size, and gets a score
/// drawn from `[score_floor, 1]`. A Poisson number of spurious `Unknown`
/// boxes is placed away from every centerline and ground-truth polygon. The
/// map is box-blurred and renormalized to a peak of 1.
pub fn simulate_detector(scene: &SyntheticScene, noise: &NoiseConfig) -> Result<(Vec<CharBox>, RasterGrid)> {
    noise.validate()?;
    let mut rng = image_rng(noise.seed, &format!("detector/{}", scene.image_id));
    let mut chars = Vec::new();
    for inst in &scene.instances {
        for c in &inst.char_boxes {
            let keep = rng.random::<f64>() >= noise.drop_prob;
            let bbox = jittered(&c.bbox, noise.jitter_frac, &mut rng)?;
            let score = noise.score_floor + (1.0 - noise.score_floor) * rng.random::<f64>();
            if keep {
                chars.push(CharBox::new(bbox, score.min(1.0), c.class)?);
            }
        }
    }

    if noise.spurious_per_image > 0.0 {
        let count = Poisson::new(noise.spurious_per_image)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(&mut rng) as usize;
        let keep_out: Vec<AxisAlignedBox> = scene.instances.iter().map(footprint).collect();
        let (cw, ch) = (scene.width as f64, scene.height as f64);
        for _ in 0..count {
            for _ in 0..100 {
                let h = rng.random_range(12.0..32.0);
                let w = 0.7 * h;
                if cw <= w || ch <= h {
                    break;
                }
                let x = rng.random::<f64>() * (cw - w);
                let y = rng.random::<f64>() * (ch - h);
                let bbox = AxisAlignedBox::new(x, y, x + w, y + h)?;
                let clear = scene
                    .instances
                    .iter()
                    .all(|i| !box_polyline_intersects(&bbox, &i.centerline))
                    && keep_out.iter().all(|k| !bbox.touches(k));
                if clear {
                    let score = noise.score_floor + (1.0 - noise.score_floor) * rng.random::<f64>();
                    chars.push(CharBox::new(bbox, score.min(1.0), CharClass::Unknown)?);
                    break;
                }
            }
        }
    }

    let ideal = RasterGrid::from_mask(&scene.centerline_mask()?, 1.0, 0.0)?;
    Ok((chars, box_blur(&ideal, noise.map_blur_radius)?))
}
