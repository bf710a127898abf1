#![allow(dead_code)]

use std::sync::Arc;

use auditboard_core::capture::{AccessibilityIssue, CaptureBundle, ElementDetection, ElementKind, IssueCategory, ScreenCapture};
use auditboard_core::geometry::Rect;
use image::{Rgb, RgbImage};

/// Screenshot filled with a diagonal pattern keyed by `seed`.
pub fn pattern(width: u32, height: u32, seed: u32) -> RgbImage {
    RgbImage::from_fn(width, height, |x, y| {
        let v = ((x * 7 + y * 13 + seed * 101) % 256) as u8;
        Rgb([v, v.wrapping_mul(3), v.wrapping_add(seed as u8)])
    })
}

pub fn capture(id: &str, ordinal: u32, img: RgbImage) -> ScreenCapture {
    ScreenCapture {
        capture_id: id.to_string(),
        ordinal,
        screenshot: Arc::new(img),
        issues: Vec::new(),
        detections: Vec::new(),
        embedding: None,
        device_scale: 1.0,
    }
}

pub fn detection(id: &str, kind: ElementKind, bbox: Rect, text: Option<&str>) -> ElementDetection {
    ElementDetection {
        detection_id: id.to_string(),
        kind,
        bbox,
        text: text.map(String::from),
        confidence: 0.9,
    }
}

pub fn issue(id: &str, category: IssueCategory, check: &str, bbox: Rect) -> AccessibilityIssue {
    AccessibilityIssue {
        issue_id: id.to_string(),
        category,
        check_name: check.to_string(),
        message: String::new(),
        bbox,
    }
}

pub fn bundle(captures: Vec<ScreenCapture>) -> CaptureBundle {
    CaptureBundle::new("app", "run", captures, None).unwrap()
}
