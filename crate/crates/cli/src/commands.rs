//! File-level wrappers over the core stages. Each function reads and writes
//! a project tree and returns what the binary needs to report.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use scribtext_core::annotation::{cost_metrics, instance_height, perturb, validate, CostReport, ImageAnnotation};
use scribtext_core::evaluation::{count_polygons, EvalCounts, EvalReport, GroundTruthFile, GroundTruthInstance};
use scribtext_core::pipeline::{run_image, ImageInputs, PipelineConfig};
use scribtext_core::reconstruction::ResultsFile;
use scribtext_core::synth::{corpus_image_id, generate_scene, simulate_detector, NoiseConfig, SceneConfig};
use scribtext_core::weak_supervision::DetectionsFile;
use scribtext_core::{Point2D, Polygon, RasterGrid};

use crate::layout::{json_stems, ImageEntry, ProjectLayout};

/// Reads every `<id>.json` annotation under `dir`, in id order. A file whose
/// image id differs from its name is an error.
pub fn load_annotations(dir: &Path) -> Result<Vec<ImageAnnotation>> {
    json_stems(dir)?
        .into_iter()
        .map(|stem| load_annotation(dir, &stem))
        .collect()
}

fn load_annotation(dir: &Path, stem: &str) -> Result<ImageAnnotation> {
    let path = dir.join(format!("{stem}.json"));
    let ann = ImageAnnotation::read(&path).with_context(|| format!("reading {}", path.display()))?;
    if ann.image_id != stem {
        bail!("{} holds image id {:?}", path.display(), ann.image_id);
    }
    Ok(ann)
}

#[derive(Debug, Default)]
pub struct ValidateOutcome {
    pub files: usize,
    /// One line per broken rule, naming image and instance.
    pub violations: Vec<String>,
    /// Files that could not be read at all.
    pub errors: Vec<String>,
}

impl ValidateOutcome {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.errors.is_empty()
    }
}

pub fn validate_project(layout: &ProjectLayout) -> Result<ValidateOutcome> {
    let dir = layout.annotations_dir();
    let mut out = ValidateOutcome::default();
    for stem in json_stems(&dir)? {
        out.files += 1;
        match load_annotation(&dir, &stem) {
            Ok(ann) => out.violations.extend(validate(&ann).iter().map(ToString::to_string)),
            Err(e) => out.errors.push(format!("{e:#}")),
        }
    }
    Ok(out)
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub images: usize,
    /// Images left out of the report, with the reason.
    pub errors: Vec<(String, String)>,
    pub report: EvalReport,
}

/// Runs every image that has ground truth: pseudo labels (when an
/// annotation exists), grouping, reconstruction and evaluation. Writes
/// `results/`, `pseudo/` and `report.json`.
///
/// An image without a detections file has no detections. An image that
/// fails is reported and left out of the totals.
pub fn run_pipeline(layout: &ProjectLayout, config: &PipelineConfig) -> Result<PipelineOutcome> {
    config.validate()?;
    let ids = json_stems(&layout.gts_dir())?;
    std::fs::create_dir_all(layout.results_dir())?;
    std::fs::create_dir_all(layout.pseudo_dir())?;
    let outcomes: Vec<(String, Result<EvalCounts>)> = ids
        .par_iter()
        .map(|id| (id.clone(), pipeline_image(layout, id, config)))
        .collect();
    let mut total = EvalCounts::default();
    let mut errors = Vec::new();
    for (id, outcome) in outcomes {
        match outcome {
            Ok(c) => total += c,
            Err(e) => errors.push((id, format!("{e:#}"))),
        }
    }
    let report = EvalReport::from_counts(total);
    std::fs::write(layout.report_path(), serde_json::to_string_pretty(&report)?)?;
    Ok(PipelineOutcome {
        images: ids.len(),
        errors,
        report,
    })
}

fn read_gt(dir: &Path, id: &str) -> Result<GroundTruthFile> {
    let path = dir.join(format!("{id}.json"));
    let gt = GroundTruthFile::read(&path).with_context(|| format!("reading {}", path.display()))?;
    if gt.image_id != id {
        bail!("{} holds image id {:?}", path.display(), gt.image_id);
    }
    Ok(gt)
}

fn pipeline_image(layout: &ProjectLayout, id: &str, config: &PipelineConfig) -> Result<EvalCounts> {
    let gt = read_gt(&layout.gts_dir(), id)?;
    let det_path = layout.detections_dir().join(format!("{id}.json"));
    let dets = if det_path.exists() {
        let d = DetectionsFile::read(&det_path).with_context(|| format!("reading {}", det_path.display()))?;
        if d.image_id != id {
            bail!("{} holds image id {:?}", det_path.display(), d.image_id);
        }
        Some(d)
    } else {
        None
    };
    let map_path = match dets.as_ref().and_then(|d| d.textline_map.as_deref()) {
        Some(name) => layout.maps_dir().join(name),
        None => layout.map_path(id),
    };
    let chars = dets.map(|d| d.chars).unwrap_or_default();
    let map = if map_path.exists() {
        Some(RasterGrid::read_tlm(&map_path).with_context(|| format!("reading {}", map_path.display()))?)
    } else if chars.is_empty() {
        None
    } else {
        bail!("missing text-line map {}", map_path.display());
    };

    let ann_path = layout.annotation_path(id);
    let annotation = if ann_path.exists() {
        Some(load_annotation(&layout.annotations_dir(), id)?)
    } else {
        None
    };

    let (detections, counts) = match &map {
        Some(map) => {
            let outcome = run_image(
                ImageInputs {
                    image_id: id,
                    chars: &chars,
                    map,
                    annotation: annotation.as_ref(),
                    gts: &gt.instances,
                },
                config,
            )?;
            if let Some(pseudo) = &outcome.pseudo {
                DetectionsFile::from(pseudo).write(layout.pseudo_dir().join(format!("{id}.json")))?;
            }
            (outcome.detections, outcome.counts)
        }
        None => (Vec::new(), count_polygons(&[], &gt.instances, config.match_iou)),
    };
    ResultsFile::new(id, &detections).write(layout.results_dir().join(format!("{id}.json")))?;
    Ok(counts)
}

/// Height of the ground-truth instance a scribble belongs to: the polygon
/// containing the scribble's arc-length midpoint, or failing that the one
/// whose boundary is nearest to it.
fn scribble_height(points: &[Point2D], gts: &[GroundTruthInstance]) -> Option<f64> {
    let mid = match scribtext_core::Polyline::new(points.to_vec()) {
        Ok(line) => line.point_at(line.length() / 2.0),
        Err(_) => *points.first()?,
    };
    let polys: Vec<&Polygon> = gts.iter().map(|g| &g.polygon).collect();
    let chosen = polys.iter().find(|p| p.contains(mid)).copied().or_else(|| {
        polys
            .iter()
            .min_by(|a, b| a.boundary_distance(mid).total_cmp(&b.boundary_distance(mid)))
            .copied()
    })?;
    Some(instance_height(chosen))
}

/// Writes a perturbed copy of every annotation to the sibling
/// `annotations-perturbed/` tree and returns the number of files.
pub fn perturb_project(layout: &ProjectLayout, offset: f64, seed: u64) -> Result<usize> {
    let anns = load_annotations(&layout.annotations_dir())?;
    let out_dir = layout.perturbed_dir();
    std::fs::create_dir_all(&out_dir)?;
    anns.par_iter()
        .map(|ann| -> Result<()> {
            let needs_height = ann.instances.iter().any(|i| !i.difficult);
            let gts = if needs_height {
                read_gt(&layout.gts_dir(), &ann.image_id)
                    .with_context(|| format!("instance heights for {}", ann.image_id))?
                    .instances
            } else {
                Vec::new()
            };
            let mut heights = HashMap::new();
            for inst in ann.instances.iter().filter(|i| !i.difficult) {
                let h = scribble_height(&inst.points, &gts).ok_or_else(|| {
                    anyhow!(
                        "image {}, instance {}: no ground truth to take a height from",
                        ann.image_id,
                        inst.id
                    )
                })?;
                heights.insert(inst.id, h);
            }
            perturb(ann, offset, &heights, seed)?.write(out_dir.join(format!("{}.json", ann.image_id)))?;
            Ok(())
        })
        .collect::<Result<Vec<()>>>()?;
    Ok(anns.len())
}

pub fn cost_project(layout: &ProjectLayout) -> Result<CostReport> {
    Ok(cost_metrics(&load_annotations(&layout.annotations_dir())?))
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub seed: u64,
    pub images: usize,
    pub scene: SceneConfig,
    pub noise: NoiseConfig,
}

/// Generates a complete synthetic project: manifest, annotations, simulated
/// detections and maps, and ground truth.
pub fn synth_project(root: &Path, opts: &SynthOptions) -> Result<()> {
    opts.noise.validate()?;
    let layout = ProjectLayout::new(root, None)?;
    for dir in [
        layout.annotations_dir(),
        layout.detections_dir(),
        layout.maps_dir(),
        layout.gts_dir(),
    ] {
        std::fs::create_dir_all(dir)?;
    }
    let entries: Vec<ImageEntry> = (0..opts.images)
        .into_par_iter()
        .map(|i| -> Result<ImageEntry> {
            let id = corpus_image_id(i);
            let scene = generate_scene(&id, opts.seed, &opts.scene)?;
            let (chars, map) = simulate_detector(&scene, &opts.noise)?;
            let map_name = format!("{id}.tlm");
            scene.annotation().write(layout.annotation_path(&id))?;
            scene
                .detections_file(chars, Some(map_name.clone()))
                .write(layout.detections_dir().join(format!("{id}.json")))?;
            map.write_tlm(layout.maps_dir().join(map_name))?;
            scene
                .ground_truth_file()
                .write(layout.gts_dir().join(format!("{id}.json")))?;
            Ok(ImageEntry {
                id,
                width: scene.width,
                height: scene.height,
                file: None,
            })
        })
        .collect::<Result<_>>()?;
    layout.write_manifest(&entries)
}

fn read_result_polygons(path: &Path, id: &str) -> Result<Vec<Polygon>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (image_id, polygons) = match ResultsFile::from_json(&text) {
        Ok(r) => (r.image_id.clone(), r.polygons()?),
        Err(results_err) => match GroundTruthFile::from_json(&text) {
            Ok(g) => (g.image_id, g.instances.into_iter().map(|i| i.polygon).collect()),
            Err(_) => return Err(results_err).with_context(|| format!("parsing {}", path.display())),
        },
    };
    if image_id != id {
        bail!("{} holds image id {:?}", path.display(), image_id);
    }
    Ok(polygons)
}

/// Scores the results in `results_dir` against `gts_dir`, micro-averaged.
/// Ground truth without a results file counts as undetected; results
/// without ground truth are an error. Ground-truth files are accepted as
/// results.
pub fn eval_dirs(results_dir: &Path, gts_dir: &Path, match_iou: f64) -> Result<EvalReport> {
    if !(match_iou > 0.0 && match_iou < 1.0) {
        bail!("match IoU {match_iou} outside (0, 1)");
    }
    let gt_ids = json_stems(gts_dir)?;
    if let Some(orphan) = json_stems(results_dir)?
        .into_iter()
        .find(|id| gt_ids.binary_search(id).is_err())
    {
        bail!("results for {orphan} have no ground truth");
    }
    let total = gt_ids
        .par_iter()
        .map(|id| -> Result<EvalCounts> {
            let gt = read_gt(gts_dir, id)?;
            let path = results_dir.join(format!("{id}.json"));
            let dets = if path.exists() {
                read_result_polygons(&path, id)?
            } else {
                Vec::new()
            };
            Ok(count_polygons(&dets, &gt.instances, match_iou))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(EvalReport::from_counts(total))
}
