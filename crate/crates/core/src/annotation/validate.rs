use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::ImageAnnotation;

/// The rule a [`Violation`] breaks.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    /// Image width or height is zero.
    EmptyImage,
    /// A non-difficult instance needs at least two points.
    TooFewPoints {
        count: usize,
    },
    /// A difficult instance carries no points at all.
    EmptyDifficult,
    /// All points of a scribble coincide.
    ZeroLength,
    NonFinite {
        index: usize,
    },
    OutOfBounds {
        index: usize,
        x: f64,
        y: f64,
    },
    DuplicateId,
}

/// One broken rule, tied to the offending instance when there is one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub image_id: String,
    pub instance_id: Option<u64>,
    #[serde(flatten)]
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "image {}", self.image_id)?;
        if let Some(id) = self.instance_id {
            write!(f, ", instance {id}")?;
        }
        match &self.rule {
            Rule::EmptyImage => write!(f, ": image has zero width or height"),
            Rule::TooFewPoints { count } => {
                write!(f, ": scribble needs at least 2 points, has {count}")
            }
            Rule::EmptyDifficult => write!(f, ": difficult instance has no points"),
            Rule::ZeroLength => write!(f, ": scribble has zero length"),
            Rule::NonFinite { index } => write!(f, ": point {index} is not finite"),
            Rule::OutOfBounds { index, x, y } => {
                write!(f, ": point {index} ({x}, {y}) lies outside the image")
            }
            Rule::DuplicateId => write!(f, ": duplicate instance id"),
        }
    }
}

/// Checks an annotation against the labeling rules. An empty result means
/// the annotation is valid.
pub fn validate(annotation: &ImageAnnotation) -> Vec<Violation> {
    let mut out = Vec::new();
    let violation = |instance_id, rule| Violation {
        image_id: annotation.image_id.clone(),
        instance_id,
        rule,
    };
    if annotation.width == 0 || annotation.height == 0 {
        out.push(violation(None, Rule::EmptyImage));
    }
    let (w, h) = (annotation.width as f64, annotation.height as f64);
    let mut seen = HashSet::new();
    for inst in &annotation.instances {
        let id = Some(inst.id);
        if !seen.insert(inst.id) {
            out.push(violation(id, Rule::DuplicateId));
        }
        if inst.difficult {
            if inst.points.is_empty() {
                out.push(violation(id, Rule::EmptyDifficult));
            }
        } else if inst.points.len() < 2 {
            out.push(violation(
                id,
                Rule::TooFewPoints {
                    count: inst.points.len(),
                },
            ));
        } else if inst.points.iter().all(|p| *p == inst.points[0]) {
            out.push(violation(id, Rule::ZeroLength));
        }
        for (index, p) in inst.points.iter().enumerate() {
            if !p.is_finite() {
                out.push(violation(id, Rule::NonFinite { index }));
            } else if p.x < 0.0 || p.y < 0.0 || p.x > w || p.y > h {
                out.push(violation(id, Rule::OutOfBounds { index, x: p.x, y: p.y }));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::ScribbleInstance;
    use super::*;
    use crate::geometry::Point2D;

    fn ann(instances: Vec<ScribbleInstance>) -> ImageAnnotation {
        ImageAnnotation {
            image_id: "a".into(),
            width: 100,
            height: 50,
            instances,
        }
    }

    #[test]
    fn minimal_legal_instance() {
        let a = ann(vec![ScribbleInstance::new(
            0,
            vec![Point2D::new(10., 20.), Point2D::new(60., 20.)],
        )]);
        assert!(validate(&a).is_empty());
    }

    #[test]
    fn single_point_instance() {
        let a = ann(vec![ScribbleInstance::new(3, vec![Point2D::new(10., 20.)])]);
        let v = validate(&a);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].instance_id, Some(3));
        assert_eq!(v[0].rule, Rule::TooFewPoints { count: 1 });
    }

    #[test]
    fn out_of_bounds_point() {
        let a = ann(vec![ScribbleInstance::new(
            0,
            vec![Point2D::new(10., 20.), Point2D::new(103., 20.)],
        )]);
        let v = validate(&a);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0].rule, Rule::OutOfBounds { index: 1, .. }));
        assert!(v[0].to_string().contains("instance 0"));
    }

    #[test]
    fn difficult_single_point_is_fine() {
        let a = ann(vec![ScribbleInstance::difficult(0, vec![Point2D::new(1., 1.)])]);
        assert!(validate(&a).is_empty());
    }

    #[test]
    fn duplicate_ids_and_zero_length() {
        let p = Point2D::new(5., 5.);
        let a = ann(vec![
            ScribbleInstance::new(1, vec![p, p]),
            ScribbleInstance::difficult(1, vec![]),
        ]);
        let rules: Vec<_> = validate(&a).into_iter().map(|v| v.rule).collect();
        assert_eq!(rules, vec![Rule::ZeroLength, Rule::DuplicateId, Rule::EmptyDifficult]);
    }
}
