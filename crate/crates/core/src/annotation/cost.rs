use serde::{Deserialize, Serialize};

use super::ImageAnnotation;

/// Annotation cost summary: points and labeling time per text instance.
///
/// Averages are absent when nothing contributes to them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_points_per_instance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_label_time_ms: Option<f64>,
    /// Non-difficult instances counted for the point average.
    pub instance_count: usize,
    /// Instances carrying a label time.
    pub timed_count: usize,
}

/// Points are averaged over non-difficult instances; label time over every
/// instance that has one. Sums are integral, so the report does not depend
/// on image or instance order.
pub fn cost_metrics(annotations: &[ImageAnnotation]) -> CostReport {
    let mut points = 0u64;
    let mut instances = 0usize;
    let mut time = 0u128;
    let mut timed = 0usize;
    for inst in annotations.iter().flat_map(|a| &a.instances) {
        if !inst.difficult {
            points += inst.points.len() as u64;
            instances += 1;
        }
        if let Some(ms) = inst.label_time_ms {
            time += ms as u128;
            timed += 1;
        }
    }
    CostReport {
        avg_points_per_instance: (instances > 0).then(|| points as f64 / instances as f64),
        avg_label_time_ms: (timed > 0).then(|| time as f64 / timed as f64),
        instance_count: instances,
        timed_count: timed,
    }
}
