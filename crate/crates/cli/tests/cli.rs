use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scribtext_core::annotation::{validate, ImageAnnotation, ScribbleInstance};
use scribtext_core::evaluation::EvalReport;
use scribtext_core::Point2D;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scribtext"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, images: usize, seed: u64) {
    let out = run(&[
        "synth",
        s(dir),
        "--images",
        &images.to_string(),
        "--seed",
        &seed.to_string(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

/// Relative path -> bytes for every file below `root`.
fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn report(path: &Path) -> EvalReport {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_report(out: &Output) -> EvalReport {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn synth_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    synth(a.path(), 20, 7);
    synth(b.path(), 20, 7);
    let ta = tree(a.path());
    assert_eq!(ta.len(), 1 + 4 * 20);
    assert_eq!(ta, tree(b.path()));
    let c = tempfile::tempdir().unwrap();
    synth(c.path(), 20, 8);
    assert_ne!(ta, tree(c.path()));
}

#[test]
fn validate_clean_and_broken_projects() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 3, 1);
    let out = run(&["validate", s(dir.path())]);
    assert_eq!(out.status.code(), Some(0));

    let path = dir.path().join("annotations/img_0001.json");
    let mut ann = ImageAnnotation::read(&path).unwrap();
    let bad_id = ann.instances[0].id;
    ann.instances[0].points.truncate(1);
    ann.write(&path).unwrap();
    let out = run(&["validate", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains(&format!("image img_0001, instance {bad_id}")), "{text}");
}

#[test]
fn validate_counts_match_per_file_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let ann_dir = dir.path().join("annotations");
    std::fs::create_dir_all(&ann_dir).unwrap();
    let p = |x: f64, y: f64| Point2D::new(x, y);
    let mut expected = 0;
    for k in 0..6u64 {
        let id = format!("m{k}");
        let mut ann = ImageAnnotation::new(&id, 50, 50);
        for j in 0..k {
            let pts = match j % 4 {
                0 => vec![p(1.0, 1.0), p(9.0, 9.0)],
                1 => vec![p(1.0, 1.0)],
                2 => vec![p(1.0, 1.0), p(80.0, 2.0)],
                _ => vec![p(3.0, 3.0), p(3.0, 3.0)],
            };
            ann.instances.push(ScribbleInstance::new(j, pts));
        }
        expected += validate(&ann).len();
        ann.write(ann_dir.join(format!("{id}.json"))).unwrap();
    }
    assert!(expected > 0);
    let out = run(&["validate", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let lines = String::from_utf8_lossy(&out.stdout)
        .lines()
        .filter(|l| l.starts_with("image "))
        .count();
    assert_eq!(lines, expected);
}

#[test]
fn pipeline_on_clean_corpus_is_accurate_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 10, 3);
    let args = ["pipeline", s(dir.path()), "--expansion-factor", "0.47"];
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&dir.path().join("report.json"));
    assert!(r.f_measure >= 0.95, "{r:?}");
    assert_eq!(stdout_report(&out), r);
    assert!(dir.path().join("results/img_0000.json").is_file());
    assert!(dir.path().join("pseudo/img_0000.json").is_file());

    let first = tree(dir.path());
    let out = run(&args);
    assert!(out.status.success());
    assert_eq!(first, tree(dir.path()));
}

#[test]
fn pipeline_without_detections_reports_nothing_found() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 3, 5);
    std::fs::remove_dir_all(dir.path().join("detections")).unwrap();
    std::fs::create_dir_all(dir.path().join("detections")).unwrap();
    let out = run(&["pipeline", s(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&dir.path().join("report.json"));
    assert_eq!(r.num_dets, 0);
    assert!(r.num_gts > 0);
    assert_eq!(r.recall, 0.0);
}

#[test]
fn pipeline_records_per_image_errors() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 3, 6);
    std::fs::remove_file(dir.path().join("maps/img_0001.tlm")).unwrap();
    let out = run(&["pipeline", s(dir.path())]);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("img_0001") && err.contains("missing"), "{err}");
    assert!(!dir.path().join("results/img_0001.json").exists());

    for id in ["img_0000", "img_0002"] {
        std::fs::remove_file(dir.path().join(format!("maps/{id}.tlm"))).unwrap();
    }
    let out = run(&["pipeline", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn perturb_offset_zero_copies_the_tree() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 4, 9);
    let out = run(&["perturb", s(dir.path()), "--offset", "0", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        tree(&dir.path().join("annotations")),
        tree(&dir.path().join("annotations-perturbed"))
    );

    let out = run(&["perturb", s(dir.path()), "--offset", "0.2", "--seed", "3"]);
    assert!(out.status.success());
    let moved = tree(&dir.path().join("annotations-perturbed"));
    assert_ne!(tree(&dir.path().join("annotations")), moved);
    let out = run(&["validate", s(dir.path())]);
    assert!(out.status.success());
    let again = run(&["perturb", s(dir.path()), "--offset", "0.2", "--seed", "3"]);
    assert!(again.status.success());
    assert_eq!(moved, tree(&dir.path().join("annotations-perturbed")));
}

#[test]
fn eval_accepts_ground_truth_as_results() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 5, 11);
    let gts = dir.path().join("gts");
    let out = run(&["eval", s(&gts), s(&gts)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = stdout_report(&out);
    assert_eq!(r.f_measure, 1.0);
    assert!(r.num_gts > 0);

    // A missing results directory means nothing was detected.
    let out = run(&["eval", s(&dir.path().join("nowhere")), s(&gts)]);
    assert!(out.status.success());
    assert_eq!(stdout_report(&out).num_dets, 0);
}

#[test]
fn cost_reports_point_average() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 3, 12);
    let out = run(&["cost", s(dir.path())]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let anns: Vec<ImageAnnotation> = (0..3)
        .map(|i| ImageAnnotation::read(dir.path().join(format!("annotations/img_{i:04}.json"))).unwrap())
        .collect();
    let insts: Vec<_> = anns
        .iter()
        .flat_map(|a| &a.instances)
        .filter(|i| !i.difficult)
        .collect();
    let avg = insts.iter().map(|i| i.points.len()).sum::<usize>() as f64 / insts.len() as f64;
    assert_eq!(v["avg_points_per_instance"].as_f64().unwrap(), avg);
    assert_eq!(v["instance_count"].as_u64().unwrap() as usize, insts.len());
}

#[test]
fn annotator_flag_selects_a_separate_set() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 2, 13);
    let per = dir.path().join("annotations/alice");
    std::fs::create_dir_all(&per).unwrap();
    let mut ann = ImageAnnotation::read(dir.path().join("annotations/img_0000.json")).unwrap();
    ann.instances[0].points.truncate(1);
    ann.write(per.join("img_0000.json")).unwrap();
    assert!(run(&["validate", s(dir.path())]).status.success());
    assert_eq!(
        run(&["validate", s(dir.path()), "--annotator", "alice"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["validate", s(dir.path()), "--annotator", "../x"]).status.code(),
        Some(1)
    );
}

#[test]
fn out_of_range_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = s(dir.path());
    for args in [
        vec!["pipeline", p, "--t-pseudo", "1.5"],
        vec!["pipeline", p, "--t-infer", "-0.1"],
        vec!["pipeline", p, "--bin-threshold", "nan"],
        vec!["pipeline", p, "--expansion-factor", "0"],
        vec!["pipeline", p, "--match-iou", "1"],
        vec!["perturb", p, "--offset=-0.5"],
        vec!["synth", p, "--drop", "2"],
        vec!["synth", p, "--instances", "0"],
        vec!["eval", p, p, "--match-iou", "0"],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}
