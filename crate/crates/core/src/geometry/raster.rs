use std::collections::VecDeque;

use super::{point_segment_distance_sq, AxisAlignedBox, Polyline};
use crate::error::{Error, Result};

/// Row-major grid of probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl RasterGrid {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} grid needs {} values, got {}",
                width,
                height,
                width * height,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("grid value {v} outside [0, 1]")));
        }
        Ok(Self { width, height, values })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Mask pixels map to `on`, everything else to `off`.
    pub fn from_mask(mask: &BinaryMask, on: f64, off: f64) -> Result<Self> {
        Self::new(
            mask.width,
            mask.height,
            mask.bits.iter().map(|&b| if b { on } else { off }).collect(),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

/// Row-major boolean grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        Ok(Self {
            width,
            height,
            bits: vec![false; width * height],
        })
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        let mut mask = Self::new(width, height)?;
        if bits.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} mask needs {} bits, got {}",
                width,
                height,
                width * height,
                bits.len()
            )));
        }
        mask.bits = bits;
        Ok(mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.bits[row * self.width + col]
    }

    /// Out-of-range coordinates read as unset.
    pub fn get_signed(&self, col: i64, row: i64) -> bool {
        col >= 0
            && row >= 0
            && (col as usize) < self.width
            && (row as usize) < self.height
            && self.get(col as usize, row as usize)
    }

    pub fn set(&mut self, col: usize, row: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn same_shape(&self, other: &BinaryMask) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn union_with(&mut self, other: &BinaryMask) {
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn subtract(&mut self, other: &BinaryMask) {
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
    }

    /// Iterates `(col, row)` of set pixels in row-major order.
    pub fn set_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }
}

/// Sets every pixel whose value is at least `threshold`.
pub fn binarize(grid: &RasterGrid, threshold: f64) -> BinaryMask {
    BinaryMask {
        width: grid.width,
        height: grid.height,
        bits: grid.values.iter().map(|&v| v >= threshold).collect(),
    }
}

/// Number of set pixels whose cell overlaps the box with positive area.
pub fn box_mask_overlap_area(bbox: &AxisAlignedBox, mask: &BinaryMask) -> f64 {
    // cell c overlaps [x1, x2] iff c < x2 and c + 1 > x1
    let col_lo = (bbox.x1.floor().max(0.0)) as usize;
    let col_hi = (bbox.x2.ceil().min(mask.width as f64)).max(0.0) as usize;
    let row_lo = (bbox.y1.floor().max(0.0)) as usize;
    let row_hi = (bbox.y2.ceil().min(mask.height as f64)).max(0.0) as usize;
    let mut count = 0usize;
    for row in row_lo..row_hi {
        for col in col_lo..col_hi {
            if mask.get(col, row) {
                count += 1;
            }
        }
    }
    count as f64
}

/// Draws `line` with the given stroke thickness: pixel `(c, r)` is set iff the
/// distance from its center to the polyline is at most `thickness / 2`.
pub fn rasterize_polyline(line: &Polyline, thickness: f64, width: usize, height: usize) -> Result<BinaryMask> {
    if !(thickness > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "thickness must be positive, got {thickness}"
        )));
    }
    let mut mask = BinaryMask::new(width, height)?;
    let radius = thickness / 2.0;
    let radius_sq = radius * radius;
    for (a, b) in line.segments() {
        let x_lo = ((a.x.min(b.x) - radius - 0.5).floor().max(0.0)) as usize;
        let x_hi = ((a.x.max(b.x) + radius - 0.5).ceil() + 1.0).clamp(0.0, width as f64) as usize;
        let y_lo = ((a.y.min(b.y) - radius - 0.5).floor().max(0.0)) as usize;
        let y_hi = ((a.y.max(b.y) + radius - 0.5).ceil() + 1.0).clamp(0.0, height as f64) as usize;
        for row in y_lo..y_hi {
            for col in x_lo..x_hi {
                let center = super::Point2D::new(col as f64 + 0.5, row as f64 + 0.5);
                if point_segment_distance_sq(center, a, b) <= radius_sq {
                    mask.set(col, row, true);
                }
            }
        }
    }
    Ok(mask)
}

/// 8-connected components, each returned as a full-size mask. Components are
/// ordered by their first pixel in row-major order.
pub fn connected_components(mask: &BinaryMask) -> Vec<BinaryMask> {
    let (w, h) = (mask.width, mask.height);
    let mut labels = vec![usize::MAX; w * h];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask.bits[start] || labels[start] != usize::MAX {
            continue;
        }
        let label = components.len();
        let mut component = BinaryMask {
            width: w,
            height: h,
            bits: vec![false; w * h],
        };
        labels[start] = label;
        queue.push_back(start);
        while let Some(idx) = queue.pop_front() {
            component.bits[idx] = true;
            let (c, r) = ((idx % w) as i64, (idx / w) as i64);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nc, nr) = (c + dc, r + dr);
                    if (dc, dr) == (0, 0) || nc < 0 || nr < 0 || nc >= w as i64 || nr >= h as i64 {
                        continue;
                    }
                    let n = nr as usize * w + nc as usize;
                    if mask.bits[n] && labels[n] == usize::MAX {
                        labels[n] = label;
                        queue.push_back(n);
                    }
                }
            }
        }
        components.push(component);
    }
    components
}
