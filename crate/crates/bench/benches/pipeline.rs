use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use scribtext_core::geometry::{
    buffer_polygon, connected_components, extract_contour, polygon_iou, rasterize_polyline,
};
use scribtext_core::pipeline::{run_scene, PipelineConfig};
use scribtext_core::reconstruction::detect_text;
use scribtext_core::synth::{
    generate_scene, ideal_outputs, NoiseConfig, SceneConfig, ShapeMix, SYNTHETIC_EXPANSION_FACTOR,
};

fn config() -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.reconstruction.expansion_factor = SYNTHETIC_EXPANSION_FACTOR;
    c
}

fn curved_scene() -> scribtext_core::synth::SyntheticScene {
    let scene_config = SceneConfig {
        shape_mix: ShapeMix {
            horizontal: 0.0,
            oriented: 0.0,
            curved: 1.0,
        },
        ..SceneConfig::default()
    };
    generate_scene("bench", 42, &scene_config).unwrap()
}

fn geometry(c: &mut Criterion) {
    let scene = curved_scene();
    let ideal = ideal_outputs(&scene).unwrap();
    let (w, h) = (scene.width as usize, scene.height as usize);
    let inst = &scene.instances[0];
    let mask = rasterize_polyline(&inst.centerline, inst.char_height, w, h).unwrap();
    let component = connected_components(&mask).remove(0);
    let contour = extract_contour(&component).unwrap();

    c.bench_function("rasterize_polyline", |b| {
        b.iter(|| rasterize_polyline(black_box(&inst.centerline), inst.char_height, w, h).unwrap())
    });
    c.bench_function("connected_components_map", |b| {
        let binary = scribtext_core::geometry::binarize(&ideal.map, 0.2);
        b.iter(|| connected_components(black_box(&binary)))
    });
    c.bench_function("extract_contour", |b| {
        b.iter(|| extract_contour(black_box(&component)).unwrap())
    });
    c.bench_function("buffer_polygon", |b| {
        b.iter(|| buffer_polygon(black_box(&contour), 0.47 * inst.char_height).unwrap())
    });
    c.bench_function("polygon_iou_concave", |b| {
        b.iter(|| polygon_iou(black_box(&contour), black_box(&inst.gt_polygon)).unwrap())
    });
}

fn pipeline(c: &mut Criterion) {
    let scene = generate_scene("bench", 7, &SceneConfig::default()).unwrap();
    let ideal = ideal_outputs(&scene).unwrap();
    let config = config();
    c.bench_function("detect_text_scene", |b| {
        b.iter(|| detect_text(black_box(&ideal.detections), &ideal.map, &config.reconstruction).unwrap())
    });
    let noise = NoiseConfig {
        drop_prob: 0.2,
        jitter_frac: 0.05,
        spurious_per_image: 3.0,
        score_floor: 0.8,
        map_blur_radius: 1,
        seed: 7,
    };
    c.bench_function("run_scene_noisy", |b| {
        b.iter(|| run_scene(black_box(&scene), Some(&noise), &config).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = geometry, pipeline
}
criterion_main!(benches);
