//! Template pre-processing and multi-scale icon matching.

use std::sync::Arc;

use image::RgbImage;

use super::groups::{build_element_groups, ElementGroupRecord};
use super::ncc::ncc;
use crate::capture::{ElementDetection, ElementKind, ScreenCapture};
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::raster::{crop_rgb, GrayPlane};

/// Scale multipliers applied to `S = template screen width / new screen width`.
pub const SCALE_FACTORS: [f64; 7] = [0.91, 0.94, 0.97, 1.0, 1.03, 1.06, 1.09];

/// Fraction of the candidate box added on each side to form the search window.
pub const SEARCH_PADDING: f64 = 0.25;

/// Everything saved about a template element and its source screen.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateRecord {
    pub source_capture_id: String,
    pub template_element: ElementDetection,
    pub all_detections: Vec<ElementDetection>,
    pub groups: Vec<ElementGroupRecord>,
    /// Pixels under `template_element.bbox`.
    pub crop: RgbImage,
    pub source_width: u32,
    /// Full source screenshot; group owners are cropped from it when a
    /// group has to be matched before its members.
    pub source_screenshot: Arc<RgbImage>,
}

impl TemplateRecord {
    pub fn detection(&self, id: &str) -> Option<&ElementDetection> {
        self.all_detections.iter().find(|d| d.detection_id == id)
    }

    /// Luma crop of any detection on the source screen.
    pub(crate) fn gray_crop(&self, element: &ElementDetection) -> GrayPlane {
        if element.detection_id == self.template_element.detection_id {
            GrayPlane::from_rgb(&self.crop)
        } else {
            GrayPlane::from_rgb_region(&self.source_screenshot, &element.bbox)
        }
    }
}

/// Collects the detections, groups and crop needed to find `target` again
/// on another screen.
pub fn preprocess_template(capture: &ScreenCapture, target: &ElementDetection) -> Result<TemplateRecord> {
    let located = capture
        .detection(&target.detection_id)
        .filter(|d| *d == target)
        .ok_or_else(|| Error::UnknownDetection {
            detection_id: target.detection_id.clone(),
            capture_id: capture.capture_id.clone(),
        })?;
    if located.bbox.is_empty() {
        return Err(Error::DegenerateTemplate(located.detection_id.clone()));
    }
    Ok(TemplateRecord {
        source_capture_id: capture.capture_id.clone(),
        template_element: located.clone(),
        all_detections: capture.detections.clone(),
        groups: build_element_groups(&capture.detections),
        crop: crop_rgb(&capture.screenshot, &located.bbox),
        source_width: capture.width(),
        source_screenshot: Arc::clone(&capture.screenshot),
    })
}

/// The seven template scales for a template screen `source_width` wide
/// matched onto a screen `new_width` wide.
pub fn template_scales(source_width: u32, new_width: u32, factors: &[f64]) -> Vec<f64> {
    let s = f64::from(source_width) / f64::from(new_width.max(1));
    factors.iter().map(|f| f * s).collect()
}

/// A template crop pre-resized for every scale.
pub(crate) struct ScaledTemplate {
    planes: Vec<GrayPlane>,
}

impl ScaledTemplate {
    pub(crate) fn new(crop: &GrayPlane, source_width: u32, new_width: u32, factors: &[f64]) -> Self {
        let planes = if crop.width() == 0 || crop.height() == 0 {
            Vec::new()
        } else {
            template_scales(source_width, new_width, factors)
                .into_iter()
                .map(|scale| {
                    // Template pixels shrink by 1/scale on the new screen.
                    let w = (f64::from(crop.width()) / scale).round().max(1.0) as u32;
                    let h = (f64::from(crop.height()) / scale).round().max(1.0) as u32;
                    crop.resized(w, h)
                })
                .collect()
        };
        ScaledTemplate { planes }
    }

    /// Best NCC over scales inside the padded window around `candidate`,
    /// mapped to `[0, 1]`. Zero when no scale fits or the crop is degenerate.
    pub(crate) fn score(&self, screen: &GrayPlane, candidate: &Rect, padding: f64) -> f64 {
        let window_rect = candidate.padded(padding, screen.width(), screen.height());
        if window_rect.is_empty() {
            return 0.0;
        }
        let window = screen.region(&window_rect);
        let best = self
            .planes
            .iter()
            .filter(|t| t.width() <= window.width() && t.height() <= window.height())
            .filter_map(|t| ncc(t, &window).ok())
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        best.map_or(0.0, |v| (v + 1.0) / 2.0)
    }
}

/// Multi-scale template match of the template crop around an Icon or
/// Picture candidate on `new_capture`. Score in `[0, 1]`.
pub fn icon_match(
    template: &TemplateRecord,
    candidate: &ElementDetection,
    new_capture: &ScreenCapture,
) -> Result<f64> {
    if !matches!(candidate.kind, ElementKind::Icon | ElementKind::Picture) {
        return Err(Error::Config(format!(
            "icon_match needs an Icon or Picture candidate, got {}",
            candidate.kind
        )));
    }
    let crop = GrayPlane::from_rgb(&template.crop);
    let scaled = ScaledTemplate::new(&crop, template.source_width, new_capture.width(), &SCALE_FACTORS);
    let screen = GrayPlane::from_rgb(&new_capture.screenshot);
    Ok(scaled.score(&screen, &candidate.bbox, SEARCH_PADDING))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_for_wider_new_screen() {
        let scales = template_scales(750, 1125, &SCALE_FACTORS);
        let expected = [0.6067, 0.6267, 0.6467, 0.6667, 0.6867, 0.7067, 0.7267];
        for (got, want) in scales.iter().zip(expected) {
            assert!((got - want).abs() < 5e-5, "{got} vs {want}");
        }
    }

    #[test]
    fn same_width_includes_unit_scale() {
        let scales = template_scales(300, 300, &SCALE_FACTORS);
        assert_eq!(scales[3], 1.0);
    }
}
