use std::cmp::Ordering;

use super::{AccessibilityIssue, ElementDetection};

/// Minimum IoU for an issue box to be attributed to a detection directly.
pub const ASSOCIATION_IOU: f64 = 0.3;

/// Finds the detection an audit issue refers to, using [`ASSOCIATION_IOU`].
pub fn associate_issue<'a>(
    issue: &AccessibilityIssue,
    detections: &'a [ElementDetection],
) -> Option<&'a ElementDetection> {
    associate_issue_with(issue, detections, ASSOCIATION_IOU)
}

/// Best-IoU detection when it reaches `min_iou`; otherwise the detection
/// whose box contains the issue center. Ties go to larger IoU, then smaller
/// area, then the lexicographically smaller id.
pub fn associate_issue_with<'a>(
    issue: &AccessibilityIssue,
    detections: &'a [ElementDetection],
    min_iou: f64,
) -> Option<&'a ElementDetection> {
    let rank = |a: &(f64, &ElementDetection), b: &(f64, &ElementDetection)| -> Ordering {
        b.0.total_cmp(&a.0)
            .then(a.1.bbox.area().cmp(&b.1.bbox.area()))
            .then(a.1.detection_id.cmp(&b.1.detection_id))
    };
    let scored: Vec<(f64, &ElementDetection)> =
        detections.iter().map(|d| (issue.bbox.iou(&d.bbox), d)).collect();

    if let Some(best) = scored.iter().min_by(|a, b| rank(a, b)) {
        if best.0 >= min_iou {
            return Some(best.1);
        }
    }
    let (cx, cy) = issue.bbox.center();
    scored
        .into_iter()
        .filter(|(_, d)| d.bbox.contains_point(cx, cy))
        .min_by(rank)
        .map(|(_, d)| d)
}
