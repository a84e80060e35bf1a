use super::{BinaryMask, Point2D, Polygon};
use crate::error::{Error, Result};

/// Outer boundary of a component, traced along pixel edges.
///
/// Vertices sit on the pixel-corner lattice and collinear corners are
/// dropped. Diagonally touching pixels stay joined (8-connectivity), which
/// can leave a pinch vertex visited twice. Holes are ignored.
pub fn extract_contour(component: &BinaryMask) -> Result<Polygon> {
    let (start_col, start_row) = component.set_pixels().next().ok_or(Error::EmptyComponent)?;
    let set = |c: i64, r: i64| component.get_signed(c, r);

    // Walk with the interior on the right of travel (y-down frame). The top
    // edge of the first row-major pixel is always on the outer boundary.
    let start = (start_col as i64, start_row as i64);
    let start_dir = (1i64, 0i64);
    let mut pos = (start.0 + 1, start.1);
    let mut dir = start_dir;
    let mut corners = vec![start];

    let max_steps = 4 * component.width() * component.height() + 4;
    for _ in 0..max_steps {
        if pos == start && dir == start_dir {
            break;
        }
        let next = next_direction(pos, dir, &set);
        if next != dir {
            corners.push(pos);
        }
        dir = next;
        if pos == start && dir == start_dir {
            break;
        }
        pos = (pos.0 + dir.0, pos.1 + dir.1);
    }
    // the start corner is a genuine turn only if we arrive heading up
    if corners.len() > 1 && corners.last() == Some(&start) {
        corners.pop();
    }

    Polygon::new(
        corners
            .into_iter()
            .map(|(x, y)| Point2D::new(x as f64, y as f64))
            .collect(),
    )
}

/// Chooses the outgoing boundary edge at lattice vertex `pos` when arriving
/// along `dir`. Candidates are tried left turn first, which joins
/// diagonally-touching pixels at saddle vertices.
fn next_direction(pos: (i64, i64), dir: (i64, i64), set: &impl Fn(i64, i64) -> bool) -> (i64, i64) {
    let (x, y) = pos;
    let nw = set(x - 1, y - 1);
    let ne = set(x, y - 1);
    let sw = set(x - 1, y);
    let se = set(x, y);
    let exists = |d: (i64, i64)| match d {
        (1, 0) => se && !ne,
        (0, 1) => sw && !se,
        (-1, 0) => nw && !sw,
        (0, -1) => ne && !nw,
        _ => false,
    };
    let left = (dir.1, -dir.0);
    let right = (-dir.1, dir.0);
    [left, dir, right]
        .into_iter()
        .find(|&d| exists(d))
        .unwrap_or((-dir.0, -dir.1))
}
