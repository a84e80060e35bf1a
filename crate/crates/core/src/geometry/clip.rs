//! Sutherland-Hodgman clipping for convex polygons.

use super::Point2D;

fn cross(o: Point2D, a: Point2D, b: Point2D) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn line_intersection(p: Point2D, q: Point2D, a: Point2D, b: Point2D) -> Point2D {
    let (dpx, dpy) = (q.x - p.x, q.y - p.y);
    let (dax, day) = (b.x - a.x, b.y - a.y);
    let denom = dpx * day - dpy * dax;
    if denom == 0.0 {
        return q;
    }
    let t = ((a.x - p.x) * day - (a.y - p.y) * dax) / denom;
    Point2D::new(p.x + t * dpx, p.y + t * dpy)
}

/// Clips `subject` against the convex `clip` ring. Both rings must have
/// positive shoelace orientation.
pub(crate) fn clip_convex(subject: &[Point2D], clip: &[Point2D]) -> Vec<Point2D> {
    let mut output = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % n]);
        let input = std::mem::take(&mut output);
        let m = input.len();
        for j in 0..m {
            let (cur, prev) = (input[j], input[(j + m - 1) % m]);
            let cur_in = cross(a, b, cur) >= 0.0;
            let prev_in = cross(a, b, prev) >= 0.0;
            if cur_in {
                if !prev_in {
                    output.push(line_intersection(prev, cur, a, b));
                }
                output.push(cur);
            } else if prev_in {
                output.push(line_intersection(prev, cur, a, b));
            }
        }
    }
    output
}

pub(crate) fn ring_area(ring: &[Point2D]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    ((0..n)
        .map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0)
        .abs()
}

pub(crate) fn convex_intersection_area(a: &[Point2D], b: &[Point2D]) -> f64 {
    ring_area(&clip_convex(a, b))
}
