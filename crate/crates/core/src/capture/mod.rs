//! Captured screens, audit issues and element detections.

mod associate;
mod bundle;

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;

pub use associate::{associate_issue, associate_issue_with, ASSOCIATION_IOU};
pub use bundle::{load_bundle, write_bundle, MANIFEST_FILE};

/// The seven audit categories reported by the accessibility inspector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IssueCategory {
    #[serde(alias = "Element Description")]
    ElementDescription,
    Contrast,
    #[serde(alias = "Hit Region")]
    HitRegion,
    #[serde(alias = "Element Detection")]
    ElementDetection,
    #[serde(alias = "Clipped Text")]
    ClippedText,
    Traits,
    #[serde(alias = "Large Text")]
    LargeText,
}

impl IssueCategory {
    pub const ALL: [IssueCategory; 7] = [
        IssueCategory::ElementDescription,
        IssueCategory::Contrast,
        IssueCategory::HitRegion,
        IssueCategory::ElementDetection,
        IssueCategory::ClippedText,
        IssueCategory::Traits,
        IssueCategory::LargeText,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            IssueCategory::ElementDescription => "ElementDescription",
            IssueCategory::Contrast => "Contrast",
            IssueCategory::HitRegion => "HitRegion",
            IssueCategory::ElementDetection => "ElementDetection",
            IssueCategory::ClippedText => "ClippedText",
            IssueCategory::Traits => "Traits",
            IssueCategory::LargeText => "LargeText",
        }
    }
}

impl fmt::Display for IssueCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for IssueCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IssueCategory::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.replace(' ', "").as_str()))
            .ok_or_else(|| Error::Config(format!("unknown issue category {s:?}")))
    }
}

/// UI element classes produced by the detection model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ElementKind {
    Text,
    Icon,
    Picture,
    TabButton,
    Toggle,
    Checkbox,
    SegmentedControl,
    TextField,
    Slider,
    Container,
    PageControl,
    Dialog,
}

impl ElementKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ElementKind::Text => "Text",
            ElementKind::Icon => "Icon",
            ElementKind::Picture => "Picture",
            ElementKind::TabButton => "TabButton",
            ElementKind::Toggle => "Toggle",
            ElementKind::Checkbox => "Checkbox",
            ElementKind::SegmentedControl => "SegmentedControl",
            ElementKind::TextField => "TextField",
            ElementKind::Slider => "Slider",
            ElementKind::Container => "Container",
            ElementKind::PageControl => "PageControl",
            ElementKind::Dialog => "Dialog",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessibilityIssue {
    pub issue_id: String,
    pub category: IssueCategory,
    /// Open set; the inspector ships 29 checks but new ones appear.
    pub check_name: String,
    pub message: String,
    pub bbox: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementDetection {
    pub detection_id: String,
    pub kind: ElementKind,
    pub bbox: Rect,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityMode {
    Embedding,
    Pixel,
    Structural,
}

impl std::str::FromStr for SimilarityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "embedding" => Ok(SimilarityMode::Embedding),
            "pixel" => Ok(SimilarityMode::Pixel),
            "structural" => Ok(SimilarityMode::Structural),
            other => Err(Error::Config(format!("unknown similarity mode {other:?}"))),
        }
    }
}

impl fmt::Display for SimilarityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimilarityMode::Embedding => "embedding",
            SimilarityMode::Pixel => "pixel",
            SimilarityMode::Structural => "structural",
        })
    }
}

/// One captured screen: screenshot, audit output and element detections.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenCapture {
    pub capture_id: String,
    pub ordinal: u32,
    pub screenshot: Arc<RgbImage>,
    pub issues: Vec<AccessibilityIssue>,
    pub detections: Vec<ElementDetection>,
    pub embedding: Option<Vec<f64>>,
    /// Points-to-pixels factor. Carried through, never applied: audit and
    /// detection boxes are both in pixels already.
    pub device_scale: f64,
}

impl ScreenCapture {
    pub fn width(&self) -> u32 {
        self.screenshot.width()
    }

    pub fn height(&self) -> u32 {
        self.screenshot.height()
    }

    pub fn detection(&self, id: &str) -> Option<&ElementDetection> {
        self.detections.iter().find(|d| d.detection_id == id)
    }

    pub fn issue(&self, id: &str) -> Option<&AccessibilityIssue> {
        self.issues.iter().find(|i| i.issue_id == id)
    }
}

/// All captures of one data-collection run, ordered by ordinal.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureBundle {
    pub app_id: String,
    pub run_id: String,
    pub captures: Vec<ScreenCapture>,
    pub similarity_mode_hint: Option<SimilarityMode>,
}

impl CaptureBundle {
    /// Validates and orders the captures.
    pub fn new(
        app_id: impl Into<String>,
        run_id: impl Into<String>,
        mut captures: Vec<ScreenCapture>,
        similarity_mode_hint: Option<SimilarityMode>,
    ) -> Result<Self> {
        if captures.is_empty() {
            return Err(Error::schema("bundle", "bundle has no captures"));
        }
        captures.sort_by_key(|c| c.ordinal);
        validate(&captures)?;
        Ok(CaptureBundle {
            app_id: app_id.into(),
            run_id: run_id.into(),
            captures,
            similarity_mode_hint,
        })
    }

    pub fn capture(&self, capture_id: &str) -> Option<&ScreenCapture> {
        self.captures.iter().find(|c| c.capture_id == capture_id)
    }

    pub fn issue_count(&self) -> usize {
        self.captures.iter().map(|c| c.issues.len()).sum()
    }

    pub fn has_all_embeddings(&self) -> bool {
        self.captures.iter().all(|c| c.embedding.is_some())
    }
}

fn validate(captures: &[ScreenCapture]) -> Result<()> {
    let mut ordinals = HashSet::new();
    let mut ids = HashSet::new();
    let mut embedding_len = None;
    for c in captures {
        let here = format!("capture {}", c.capture_id);
        if !ordinals.insert(c.ordinal) {
            return Err(Error::schema(here, format!("duplicate ordinal {}", c.ordinal)));
        }
        if !ids.insert(c.capture_id.as_str()) {
            return Err(Error::schema(here, "duplicate capture_id"));
        }
        if c.device_scale.is_nan() || c.device_scale <= 0.0 {
            return Err(Error::schema(here, "device_scale must be positive"));
        }
        let (w, h) = (c.width(), c.height());
        let mut issue_ids = HashSet::new();
        for issue in &c.issues {
            if !issue_ids.insert(issue.issue_id.as_str()) {
                return Err(Error::schema(&here, format!("duplicate issue id {}", issue.issue_id)));
            }
            if !issue.bbox.within(w, h) {
                return Err(Error::schema(&here, format!("issue {} bbox outside screenshot", issue.issue_id)));
            }
        }
        let mut det_ids = HashSet::new();
        for d in &c.detections {
            if !det_ids.insert(d.detection_id.as_str()) {
                return Err(Error::schema(&here, format!("duplicate detection id {}", d.detection_id)));
            }
            if !d.bbox.within(w, h) {
                return Err(Error::schema(&here, format!("detection {} bbox outside screenshot", d.detection_id)));
            }
            if !(0.0..=1.0).contains(&d.confidence) {
                return Err(Error::schema(&here, format!("detection {} confidence outside [0,1]", d.detection_id)));
            }
        }
        if let Some(e) = &c.embedding {
            match embedding_len {
                None => embedding_len = Some(e.len()),
                Some(n) if n != e.len() => {
                    return Err(Error::schema(here, format!("embedding length {} differs from {n}", e.len())));
                }
                _ => {}
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_parses_loosely() {
        assert_eq!("Hit Region".parse::<IssueCategory>().unwrap(), IssueCategory::HitRegion);
        assert_eq!("largetext".parse::<IssueCategory>().unwrap(), IssueCategory::LargeText);
        assert!("Spelling".parse::<IssueCategory>().is_err());
    }

    #[test]
    fn empty_bundle_is_rejected() {
        assert!(CaptureBundle::new("a", "r", vec![], None).is_err());
    }
}
