//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scribtext_core::evaluation::GroundTruthInstance;
use scribtext_core::geometry::polygon_iou;
use scribtext_core::weak_supervision::{CharBox, CharClass};
use scribtext_core::{AxisAlignedBox, BinaryMask, Point2D, Polygon, Polyline, RasterGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_polyline(rng: &mut ChaCha8Rng, w: f64, h: f64) -> Polyline {
    loop {
        let n = rng.random_range(2..7);
        let pts = (0..n)
            .map(|_| Point2D::new(rng.random_range(-5.0..w + 5.0), rng.random_range(-5.0..h + 5.0)))
            .collect();
        if let Ok(line) = Polyline::new(pts) {
            return line;
        }
    }
}

pub fn random_box(rng: &mut ChaCha8Rng, w: f64, h: f64) -> AxisAlignedBox {
    let (bw, bh) = (rng.random_range(1.0..40.0), rng.random_range(1.0..40.0));
    let (x, y) = (rng.random_range(-10.0..w), rng.random_range(-10.0..h));
    AxisAlignedBox::new(x, y, x + bw, y + bh).unwrap()
}

pub fn random_class(rng: &mut ChaCha8Rng) -> CharClass {
    match rng.random_range(0..5) {
        0 => CharClass::Unknown,
        1 => CharClass::Background,
        2 => CharClass::Digit(rng.random_range(0..10)),
        3 => CharClass::Foreground,
        _ => CharClass::Letter((b'a' + rng.random_range(0..26u8)) as char),
    }
}

pub fn random_char(rng: &mut ChaCha8Rng, w: f64, h: f64) -> CharBox {
    CharBox::new(random_box(rng, w, h), rng.random::<f64>(), random_class(rng)).unwrap()
}

fn point_segment_distance(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    (p.x - a.x - t * dx).hypot(p.y - a.y - t * dy)
}

/// Pixel set iff its center lies within `t / 2` of the polyline.
pub fn brute_raster(line: &Polyline, t: f64, w: usize, h: usize) -> Vec<bool> {
    let pts = line.points();
    let mut bits = vec![false; w * h];
    for r in 0..h {
        for c in 0..w {
            let p = Point2D::new(c as f64 + 0.5, r as f64 + 0.5);
            let d = pts
                .windows(2)
                .map(|s| point_segment_distance(p, s[0], s[1]))
                .fold(f64::INFINITY, f64::min);
            bits[r * w + c] = d <= t / 2.0;
        }
    }
    bits
}

/// 8-connected labeling by union-find; components listed by smallest index.
pub fn union_find_components(mask: &BinaryMask) -> Vec<Vec<usize>> {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut parent: Vec<usize> = (0..w * h).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for r in 0..h {
        for c in 0..w {
            if !bits[r * w + c] {
                continue;
            }
            for (dc, dr) in [(1i64, 0i64), (-1, 1), (0, 1), (1, 1)] {
                let (nc, nr) = (c as i64 + dc, r as i64 + dr);
                if nc < 0 || nc >= w as i64 || nr >= h as i64 {
                    continue;
                }
                let n = nr as usize * w + nc as usize;
                if bits[n] {
                    let (a, b) = (find(&mut parent, r * w + c), find(&mut parent, n));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in (0..w * h).filter(|&i| bits[i]) {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

fn orient(a: Point2D, b: Point2D, c: Point2D) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point2D, b: Point2D, p: Point2D) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segment/segment intersection by orientation tests.
pub fn segments_intersect(p1: Point2D, p2: Point2D, q1: Point2D, q2: Point2D) -> bool {
    let (d1, d2) = (orient(q1, q2, p1), orient(q1, q2, p2));
    let (d3, d4) = (orient(p1, p2, q1), orient(p1, p2, q2));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// Closed box meets the polyline: an endpoint inside or a crossing with a box edge.
pub fn box_meets_polyline(b: &AxisAlignedBox, line: &Polyline) -> bool {
    let corners = [
        Point2D::new(b.x1, b.y1),
        Point2D::new(b.x2, b.y1),
        Point2D::new(b.x2, b.y2),
        Point2D::new(b.x1, b.y2),
    ];
    let inside = |p: &Point2D| p.x >= b.x1 && p.x <= b.x2 && p.y >= b.y1 && p.y <= b.y2;
    line.points().iter().any(inside)
        || line
            .points()
            .windows(2)
            .any(|s| (0..4).any(|k| segments_intersect(s[0], s[1], corners[k], corners[(k + 1) % 4])))
}

/// Three-predicate pseudo-label filter: score, class, scribble contact.
pub fn pseudo_oracle(dets: &[CharBox], scribbles: &[Polyline], t: f64) -> Vec<CharBox> {
    let mut out = Vec::new();
    for d in dets {
        let confident = d.score >= t;
        let labeled = !matches!(d.class, CharClass::Unknown | CharClass::Background);
        let touches = scribbles.iter().any(|s| box_meets_polyline(&d.bbox, s));
        if confident && labeled && touches {
            out.push(*d);
        }
    }
    out
}

/// OHEM loss by sorting every eligible negative and summing naively.
pub fn ohem_oracle(pred: &RasterGrid, target: &BinaryMask, ignore: &BinaryMask, ratio: usize) -> f64 {
    let v = pred.values();
    let n = v.len();
    let pos: Vec<usize> = (0..n).filter(|&i| target.bits()[i] && !ignore.bits()[i]).collect();
    let mut neg: Vec<usize> = (0..n).filter(|&i| !target.bits()[i] && !ignore.bits()[i]).collect();
    neg.sort_by(|a, b| v[*b].partial_cmp(&v[*a]).unwrap().then(a.cmp(b)));
    let k = if pos.is_empty() { 100 } else { 3 * pos.len() }.min(neg.len());
    assert_eq!(ratio, 3);
    let total = pos.len() + k;
    if total == 0 {
        return 0.0;
    }
    let clamp = |x: f64| x.clamp(1e-7, 1.0 - 1e-7);
    let mut sum = 0.0;
    for &i in &pos {
        sum -= clamp(v[i]).ln();
    }
    for &i in &neg[..k] {
        sum -= (1.0 - clamp(v[i])).ln();
    }
    sum / total as f64
}

/// Largest number of one-to-one pairs with IoU at or above the threshold,
/// by enumerating every assignment.
pub fn optimal_assignment(dets: &[Polygon], gts: &[GroundTruthInstance], thr: f64) -> usize {
    fn go(d: usize, dets: &[Polygon], gts: &[GroundTruthInstance], used: &mut Vec<bool>, thr: f64) -> usize {
        if d == dets.len() {
            return 0;
        }
        let mut best = go(d + 1, dets, gts, used, thr);
        for g in 0..gts.len() {
            if used[g] || gts[g].difficult {
                continue;
            }
            if polygon_iou(&dets[d], &gts[g].polygon).unwrap() >= thr {
                used[g] = true;
                best = best.max(1 + go(d + 1, dets, gts, used, thr));
                used[g] = false;
            }
        }
        best
    }
    go(0, dets, gts, &mut vec![false; gts.len()], thr)
}

/// Kolmogorov-Smirnov statistic of `samples` against uniform on `[lo, hi]`.
pub fn ks_uniform(samples: &mut [f64], lo: f64, hi: f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Critical KS value at 1% significance for large `n`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Random convex polygon: sorted angles on a jittered circle.
pub fn random_convex(rng: &mut ChaCha8Rng) -> Polygon {
    loop {
        let n = rng.random_range(3..10);
        let (cx, cy, r) = (
            rng.random_range(0.0..100.0),
            rng.random_range(0.0..100.0),
            rng.random_range(3.0..60.0),
        );
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pts = angles
            .iter()
            .map(|a| Point2D::new(cx + r * a.cos(), cy + r * a.sin()))
            .collect();
        if let Ok(p) = Polygon::new(pts) {
            if p.is_convex() && p.area() > 1.0 {
                return p;
            }
        }
    }
}
