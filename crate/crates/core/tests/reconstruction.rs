mod common;

use rand::seq::SliceRandom;
use rand::Rng;
use scribtext_core::geometry::{box_mask_overlap_area, polygon_iou, rasterize_polyline};
use scribtext_core::reconstruction::{
    expansion_distance, extract_textlines, group_chars, naive_transcript, reconstruct, CharGroup, ReconstructionConfig,
    TextLineRegion,
};
use scribtext_core::synth::{generate_corpus, ideal_outputs, SceneConfig, SYNTHETIC_EXPANSION_FACTOR};
use scribtext_core::weak_supervision::{CharBox, CharClass, ClassMode};
use scribtext_core::{AxisAlignedBox, BinaryMask, RasterGrid};

fn random_regions(rng: &mut rand_chacha::ChaCha8Rng) -> Vec<TextLineRegion> {
    let (w, h) = (100, 80);
    let mut mask = BinaryMask::new(w, h).unwrap();
    for _ in 0..rng.random_range(1..5) {
        let line = common::random_polyline(rng, w as f64, h as f64);
        mask.union_with(&rasterize_polyline(&line, 5.0, w, h).unwrap());
    }
    extract_textlines(&RasterGrid::from_mask(&mask, 1.0, 0.0).unwrap(), 0.2).unwrap()
}

fn key(c: &CharBox) -> [u64; 5] {
    [c.bbox.x1, c.bbox.y1, c.bbox.x2, c.bbox.y2, c.score].map(f64::to_bits)
}

fn normalized(groups: &[CharGroup]) -> Vec<(u32, Vec<[u64; 5]>)> {
    groups
        .iter()
        .map(|g| {
            let mut m: Vec<_> = g.members.iter().map(key).collect();
            m.sort();
            (g.region_id, m)
        })
        .collect()
}

fn brute_overlap(b: &AxisAlignedBox, mask: &BinaryMask) -> f64 {
    let mut area = 0.0;
    for r in 0..mask.height() {
        for c in 0..mask.width() {
            if mask.get(c, r) {
                let (x, y) = (c as f64, r as f64);
                let ix = (b.x2.min(x + 1.0) - b.x1.max(x)).max(0.0);
                let iy = (b.y2.min(y + 1.0) - b.y1.max(y)).max(0.0);
                area += f64::from(ix * iy > 0.0);
            }
        }
    }
    area
}

#[test]
fn overlap_count_matches_cellwise_loop() {
    let mut rng = common::rng(30);
    for _ in 0..50 {
        let regions = random_regions(&mut rng);
        for _ in 0..20 {
            let b = common::random_box(&mut rng, 100.0, 80.0);
            for r in &regions {
                assert_eq!(box_mask_overlap_area(&b, &r.mask), brute_overlap(&b, &r.mask));
            }
        }
    }
}

#[test]
fn grouping_matches_argmax_oracle() {
    let mut rng = common::rng(31);
    for _ in 0..100 {
        let regions = random_regions(&mut rng);
        let chars: Vec<CharBox> = (0..30).map(|_| common::random_char(&mut rng, 100.0, 80.0)).collect();
        let mut want: Vec<CharGroup> = regions
            .iter()
            .map(|r| CharGroup {
                region_id: r.region_id,
                members: vec![],
            })
            .collect();
        for c in chars.iter().filter(|c| c.score >= 0.5) {
            let overlaps: Vec<f64> = regions.iter().map(|r| brute_overlap(&c.bbox, &r.mask)).collect();
            let best = overlaps.iter().copied().fold(0.0, f64::max);
            if best > 0.0 {
                let slot = overlaps.iter().position(|&o| o == best).unwrap();
                want[slot].members.push(*c);
            }
        }
        want.retain(|g| !g.members.is_empty());
        assert_eq!(normalized(&group_chars(&chars, &regions, 0.5)), normalized(&want));
    }
}

#[test]
fn grouping_ignores_input_order() {
    let mut rng = common::rng(32);
    for _ in 0..30 {
        let mut regions = random_regions(&mut rng);
        let mut chars: Vec<CharBox> = (0..30).map(|_| common::random_char(&mut rng, 100.0, 80.0)).collect();
        let before = group_chars(&chars, &regions, 0.3);
        chars.shuffle(&mut rng);
        regions.shuffle(&mut rng);
        let after = group_chars(&chars, &regions, 0.3);
        assert_eq!(before, after);
        let config = ReconstructionConfig::default();
        assert_eq!(
            reconstruct(&regions, &before, &config).unwrap(),
            reconstruct(&regions, &after, &config).unwrap()
        );
    }
}

#[test]
fn raising_t_infer_never_grows_a_group() {
    let mut rng = common::rng(33);
    for _ in 0..30 {
        let regions = random_regions(&mut rng);
        let chars: Vec<CharBox> = (0..40).map(|_| common::random_char(&mut rng, 100.0, 80.0)).collect();
        let mut previous = group_chars(&chars, &regions, 0.0);
        for t in [0.2, 0.4, 0.6, 0.8, 1.0] {
            let current = group_chars(&chars, &regions, t);
            for g in &current {
                let before = previous.iter().find(|p| p.region_id == g.region_id).unwrap();
                assert!(g.members.len() <= before.members.len());
            }
            previous = current;
        }
    }
}

#[test]
fn expansion_distance_matches_loop() {
    let mut rng = common::rng(34);
    for _ in 0..200 {
        let n = rng.random_range(1..12);
        let members: Vec<CharBox> = (0..n).map(|_| common::random_char(&mut rng, 50.0, 50.0)).collect();
        let mut sum = 0.0;
        for m in &members {
            sum += (m.bbox.height() * m.bbox.width()).sqrt();
        }
        let d = expansion_distance(&CharGroup { region_id: 0, members }).unwrap();
        assert!((d - sum / n as f64).abs() <= 1e-12);
        assert!(d > 0.0);
    }
}

#[test]
fn transcript_equals_sort_oracle() {
    let mut rng = common::rng(35);
    for _ in 0..200 {
        let members: Vec<CharBox> = (0..rng.random_range(1..8))
            .map(|_| {
                let x = rng.random_range(0.0..500.0);
                let class = CharClass::Letter((b'a' + rng.random_range(0..26u8)) as char);
                CharBox::new(AxisAlignedBox::new(x, 0.0, x + 5.0, 10.0).unwrap(), 1.0, class).unwrap()
            })
            .collect();
        let mut sorted = members.clone();
        sorted.sort_by(|a, b| a.bbox.center().x.partial_cmp(&b.bbox.center().x).unwrap());
        let want: String = sorted
            .iter()
            .map(|c| match c.class {
                CharClass::Letter(l) => l,
                _ => unreachable!(),
            })
            .collect();
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        let group = CharGroup {
            region_id: 0,
            members: shuffled,
        };
        assert_eq!(naive_transcript(&group, ClassMode::All), want);
        assert_eq!(naive_transcript(&group, ClassMode::Bf), "#".repeat(members.len()));
    }
}

#[test]
fn boundaries_strictly_grow_their_regions() {
    let mut rng = common::rng(36);
    for _ in 0..30 {
        let regions = random_regions(&mut rng);
        let chars: Vec<CharBox> = (0..30).map(|_| common::random_char(&mut rng, 100.0, 80.0)).collect();
        let groups = group_chars(&chars, &regions, 0.0);
        for det in reconstruct(&regions, &groups, &ReconstructionConfig::default()).unwrap() {
            let region = regions.iter().find(|r| r.region_id == det.region_id).unwrap();
            assert!(det.boundary.area() > region.contour.area());
            assert!(region.contour.vertices().iter().all(|v| det.boundary.contains(*v)));
        }
    }
}

fn tuned() -> ReconstructionConfig {
    ReconstructionConfig {
        expansion_factor: SYNTHETIC_EXPANSION_FACTOR,
        ..ReconstructionConfig::default()
    }
}

#[test]
fn perfect_inputs_reconstruct_every_instance() {
    for scene in generate_corpus(40, 20, &SceneConfig::default()).unwrap() {
        let ideal = ideal_outputs(&scene).unwrap();
        let regions = extract_textlines(&ideal.map, 0.2).unwrap();
        let groups = group_chars(&ideal.detections, &regions, 0.5);
        let dets = reconstruct(&regions, &groups, &tuned()).unwrap();
        let regular: Vec<_> = scene.instances.iter().filter(|i| !i.difficult).collect();
        assert_eq!(dets.len(), regular.len());
        for det in &dets {
            let best = regular
                .iter()
                .map(|i| polygon_iou(&det.boundary, &i.gt_polygon).unwrap())
                .fold(0.0, f64::max);
            assert!(best >= 0.8, "{}: IoU {best}", scene.image_id);
        }
    }
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[test]
fn missing_characters_barely_move_the_boundary() {
    let mut rng = common::rng(41);
    let config = tuned();
    let (mut trials, mut stable_d, mut good_iou) = (0, 0, 0);
    for scene in generate_corpus(42, 30, &SceneConfig::default()).unwrap() {
        let ideal = ideal_outputs(&scene).unwrap();
        let regions = extract_textlines(&ideal.map, 0.2).unwrap();
        let groups = group_chars(&ideal.detections, &regions, 0.5);
        for group in &groups {
            let region = regions.iter().find(|r| r.region_id == group.region_id).unwrap();
            let gt = scene
                .instances
                .iter()
                .filter(|i| !i.difficult)
                .map(|i| &i.gt_polygon)
                .max_by(|a, b| {
                    let ia = polygon_iou(a, &region.contour).unwrap();
                    let ib = polygon_iou(b, &region.contour).unwrap();
                    ia.total_cmp(&ib)
                })
                .unwrap();
            let sizes: Vec<f64> = group
                .members
                .iter()
                .map(|m| (m.bbox.width() * m.bbox.height()).sqrt())
                .collect();
            let spread = sample_std(&sizes);
            let full = expansion_distance(group).unwrap();
            for _ in 0..20 {
                let n = group.members.len();
                let remove = rng.random_range(1..=n / 2);
                let mut kept = group.members.clone();
                kept.shuffle(&mut rng);
                kept.truncate(n - remove);
                let partial = CharGroup {
                    region_id: group.region_id,
                    members: kept,
                };
                let d = expansion_distance(&partial).unwrap();
                stable_d += usize::from((d - full).abs() < spread);
                let det = reconstruct(&regions, &[partial], &config).unwrap().remove(0);
                good_iou += usize::from(polygon_iou(&det.boundary, gt).unwrap() >= 0.7);
                trials += 1;
            }
        }
    }
    let (d_rate, iou_rate) = (stable_d as f64 / trials as f64, good_iou as f64 / trials as f64);
    assert!(
        d_rate >= 0.95,
        "D moved less than one std in {d_rate:.3} of {trials} trials"
    );
    assert!(iou_rate >= 0.95, "IoU >= 0.7 in {iou_rate:.3} of {trials} trials");
}
