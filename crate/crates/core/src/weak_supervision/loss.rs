//! Reference implementations of the detector's loss terms. These verify
//! targets and sampling; nothing here trains a model.

use super::{CharClass, ClassMode};
use crate::error::{Error, Result};
use crate::geometry::{AxisAlignedBox, BinaryMask, RasterGrid};

/// Probability clamp keeping `log` finite.
pub const PROB_EPSILON: f64 = 1e-7;
/// Negatives sampled per positive pixel.
pub const DEFAULT_NEG_RATIO: usize = 3;
/// Negatives sampled when an image has no positive pixels.
pub const EMPTY_POSITIVE_NEGATIVES: usize = 100;

/// Box regression target `(dx, dy, dw, dh)` from `proposal` to `target`.
pub fn box_offsets(proposal: &AxisAlignedBox, target: &AxisAlignedBox) -> [f64; 4] {
    let (pc, tc) = (proposal.center(), target.center());
    let (pw, ph) = (proposal.width(), proposal.height());
    [
        (tc.x - pc.x) / pw,
        (tc.y - pc.y) / ph,
        (target.width() / pw).ln(),
        (target.height() / ph).ln(),
    ]
}

/// Inverse of [`box_offsets`].
pub fn apply_offsets(proposal: &AxisAlignedBox, offsets: [f64; 4]) -> Result<AxisAlignedBox> {
    let pc = proposal.center();
    let (pw, ph) = (proposal.width(), proposal.height());
    let (cx, cy) = (pc.x + offsets[0] * pw, pc.y + offsets[1] * ph);
    let (w, h) = (pw * offsets[2].exp(), ph * offsets[3].exp());
    AxisAlignedBox::new(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
}

pub fn smooth_l1(e: f64) -> f64 {
    let a = e.abs();
    if a < 1.0 {
        0.5 * e * e
    } else {
        a - 0.5
    }
}

/// Compensated (Neumaier) summation.
fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn log_softmax_at(logits: &[f64], index: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + stable_sum(logits.iter().map(|l| (l - max).exp())).ln();
    logits[index] - lse
}

/// Character loss terms `(l_regress, l_classify)`.
///
/// `l_regress` is the smooth-L1 error summed over the four offsets and
/// averaged over positive proposals. `l_classify` is softmax cross-entropy
/// averaged over all sampled proposals, with targets indexed by `mode`.
pub fn char_loss(
    pred_offsets: &[[f64; 4]],
    target_offsets: &[[f64; 4]],
    pred_class_logits: &[Vec<f64>],
    target_classes: &[CharClass],
    mode: ClassMode,
) -> Result<(f64, f64)> {
    if pred_offsets.len() != target_offsets.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predicted offsets vs {} targets",
            pred_offsets.len(),
            target_offsets.len()
        )));
    }
    if pred_class_logits.len() != target_classes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} logit rows vs {} class targets",
            pred_class_logits.len(),
            target_classes.len()
        )));
    }
    let l_regress = if pred_offsets.is_empty() {
        0.0
    } else {
        stable_sum(
            pred_offsets
                .iter()
                .zip(target_offsets)
                .flat_map(|(p, t)| (0..4).map(move |k| smooth_l1(p[k] - t[k]))),
        ) / pred_offsets.len() as f64
    };
    let mut terms = Vec::with_capacity(target_classes.len());
    for (logits, &class) in pred_class_logits.iter().zip(target_classes) {
        if logits.len() != mode.num_classes() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} expects {} logits, got {}",
                mode,
                mode.num_classes(),
                logits.len()
            )));
        }
        let index = mode
            .class_index(class)
            .ok_or_else(|| Error::InvalidParameter(format!("class {class} is not representable in {mode:?}")))?;
        terms.push(-log_softmax_at(logits, index));
    }
    let l_classify = if terms.is_empty() {
        0.0
    } else {
        stable_sum(terms.iter().copied()).max(0.0) / terms.len() as f64
    };
    Ok((l_regress, l_classify))
}

/// Pixel indices (row-major) selected for the text-line loss.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OhemSample {
    pub positives: Vec<usize>,
    /// Hardest negatives, highest predicted value first.
    pub negatives: Vec<usize>,
}

impl OhemSample {
    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_shapes(pred: &RasterGrid, target: &BinaryMask, ignore: &BinaryMask) -> Result<()> {
    let shape = (pred.width(), pred.height());
    for (name, mask) in [("target", target), ("ignore", ignore)] {
        if (mask.width(), mask.height()) != shape {
            return Err(Error::DimensionMismatch(format!(
                "{name} mask is {}x{}, prediction is {}x{}",
                mask.width(),
                mask.height(),
                shape.0,
                shape.1
            )));
        }
    }
    Ok(())
}

/// Online hard negative mining over the text-line map.
///
/// Positives are all target pixels outside `ignore`. Negatives are the
/// `neg_ratio * positives` non-target, non-ignored pixels with the highest
/// predicted value (capped by availability), ordered by value then index.
/// With no positives, the [`EMPTY_POSITIVE_NEGATIVES`] hardest are taken.
pub fn ohem_sample(
    pred: &RasterGrid,
    target: &BinaryMask,
    ignore: &BinaryMask,
    neg_ratio: usize,
) -> Result<OhemSample> {
    check_shapes(pred, target, ignore)?;
    let (t, ig) = (target.bits(), ignore.bits());
    let positives: Vec<usize> = (0..t.len()).filter(|&i| t[i] && !ig[i]).collect();
    let mut eligible: Vec<usize> = (0..t.len()).filter(|&i| !t[i] && !ig[i]).collect();
    let wanted = if positives.is_empty() {
        EMPTY_POSITIVE_NEGATIVES
    } else {
        neg_ratio.saturating_mul(positives.len())
    };
    let k = wanted.min(eligible.len());
    let values = pred.values();
    let harder = |a: &usize, b: &usize| values[*b].total_cmp(&values[*a]).then(a.cmp(b));
    if k > 0 && k < eligible.len() {
        eligible.select_nth_unstable_by(k - 1, harder);
    }
    eligible.truncate(k);
    eligible.sort_unstable_by(harder);
    Ok(OhemSample {
        positives,
        negatives: eligible,
    })
}

/// Binary cross-entropy over a fixed sample, `-(1/N) sum [y ln x + (1-y) ln(1-x)]`.
pub fn line_loss_on_sample(pred: &RasterGrid, sample: &OhemSample) -> f64 {
    if sample.is_empty() {
        return 0.0;
    }
    let v = pred.values();
    let clamp = |x: f64| x.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
    let terms = sample
        .positives
        .iter()
        .map(|&i| -clamp(v[i]).ln())
        .chain(sample.negatives.iter().map(|&i| -(1.0 - clamp(v[i])).ln()));
    stable_sum(terms) / sample.len() as f64
}

/// Gradient of [`line_loss_on_sample`] with respect to each sampled pixel,
/// `-(y - x) / (x (1 - x)) / N`, holding the sample fixed.
pub fn line_loss_gradient(pred: &RasterGrid, sample: &OhemSample) -> Vec<(usize, f64)> {
    let n = sample.len() as f64;
    let v = pred.values();
    let grad = |i: usize, y: f64| {
        let x = v[i].clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
        (i, -(y - x) / (x * (1.0 - x)) / n)
    };
    sample
        .positives
        .iter()
        .map(|&i| grad(i, 1.0))
        .chain(sample.negatives.iter().map(|&i| grad(i, 0.0)))
        .collect()
}

/// Text-line loss with OHEM sampling.
pub fn line_loss_ohem(pred: &RasterGrid, target: &BinaryMask, ignore: &BinaryMask, neg_ratio: usize) -> Result<f64> {
    let sample = ohem_sample(pred, target, ignore, neg_ratio)?;
    Ok(line_loss_on_sample(pred, &sample))
}

/// Total objective broken into its parts. The region-proposal loss is
/// computed elsewhere and passed through when available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub l_regress: f64,
    pub l_classify: f64,
    pub l_char: f64,
    pub l_line: f64,
    pub l_rpn: Option<f64>,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(l_regress: f64, l_classify: f64, l_line: f64, l_rpn: Option<f64>) -> Self {
        let l_char = l_regress + l_classify;
        Self {
            l_regress,
            l_classify,
            l_char,
            l_line,
            l_rpn,
            total: l_rpn.unwrap_or(0.0) + l_char + l_line,
        }
    }
}
