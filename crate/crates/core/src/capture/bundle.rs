//! On-disk bundle layout: `manifest.json` plus per-capture `NNN.png`,
//! `NNN.issues.json`, `NNN.detections.json` and optional `NNN.embedding.json`.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AccessibilityIssue, CaptureBundle, ElementDetection, ElementKind, IssueCategory};
use super::{ScreenCapture, SimilarityMode};
use crate::error::{Error, Result};
use crate::geometry::Rect;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    app_id: String,
    run_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    similarity_mode_hint: Option<SimilarityMode>,
    captures: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    capture_id: String,
    ordinal: u32,
    screenshot: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    issues: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detections: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    device_scale: Option<f64>,
}

/// Signed box as written by audit tools; may poke outside the screenshot.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawBox {
    x: i64,
    y: i64,
    w: i64,
    h: i64,
}

impl From<Rect> for RawBox {
    fn from(r: Rect) -> Self {
        RawBox {
            x: r.x.into(),
            y: r.y.into(),
            w: r.w.into(),
            h: r.h.into(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct IssueEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    category: IssueCategory,
    check_name: String,
    #[serde(default)]
    message: String,
    bbox: RawBox,
}

#[derive(Debug, Serialize, Deserialize)]
struct DetectionEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    kind: ElementKind,
    bbox: RawBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default = "full_confidence")]
    confidence: f64,
}

fn full_confidence() -> f64 {
    1.0
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::schema(path.display().to_string(), e.to_string()))
}

fn clamp_box(b: RawBox, width: u32, height: u32, file: &Path, what: &str) -> Result<Rect> {
    if b.w < 0 || b.h < 0 {
        return Err(Error::schema(
            file.display().to_string(),
            format!("{what}: negative bbox extent ({}x{})", b.w, b.h),
        ));
    }
    Ok(Rect::clamped(b.x, b.y, b.w, b.h, width, height))
}

/// Loads and validates a bundle directory. Boxes are clamped to the
/// screenshot; captures come back sorted by ordinal.
pub fn load_bundle(dir: &Path) -> Result<CaptureBundle> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(Error::MissingManifest(manifest_path));
    }
    let manifest: Manifest = read_json(&manifest_path)?;
    let mut captures = Vec::with_capacity(manifest.captures.len());
    for entry in manifest.captures {
        captures.push(load_capture(dir, entry)?);
    }
    CaptureBundle::new(manifest.app_id, manifest.run_id, captures, manifest.similarity_mode_hint)
}

fn load_capture(dir: &Path, entry: ManifestEntry) -> Result<ScreenCapture> {
    let stem = format!("{:03}", entry.ordinal);
    let png_path = dir.join(&entry.screenshot);
    if !png_path.is_file() {
        return Err(Error::Raster {
            path: png_path.clone(),
            source: image::ImageError::IoError(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "screenshot file not found",
            )),
        });
    }
    let screenshot = image::open(&png_path)
        .map_err(|source| Error::Raster {
            path: png_path.clone(),
            source,
        })?
        .to_rgb8();
    let (w, h) = screenshot.dimensions();

    let issues_path = dir.join(entry.issues.unwrap_or_else(|| format!("{stem}.issues.json")));
    let raw_issues: Vec<IssueEntry> = if issues_path.is_file() {
        read_json(&issues_path)?
    } else {
        Vec::new()
    };
    let issues = raw_issues
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let issue_id = r.id.unwrap_or_else(|| format!("{}/i{i}", entry.capture_id));
            Ok(AccessibilityIssue {
                bbox: clamp_box(r.bbox, w, h, &issues_path, &issue_id)?,
                issue_id,
                category: r.category,
                check_name: r.check_name,
                message: r.message,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let det_path = dir.join(entry.detections.unwrap_or_else(|| format!("{stem}.detections.json")));
    let raw_dets: Vec<DetectionEntry> = if det_path.is_file() {
        read_json(&det_path)?
    } else {
        Vec::new()
    };
    let detections = raw_dets
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let detection_id = r.id.unwrap_or_else(|| format!("{}/d{i}", entry.capture_id));
            if !(0.0..=1.0).contains(&r.confidence) {
                return Err(Error::schema(
                    det_path.display().to_string(),
                    format!("{detection_id}: confidence {} outside [0,1]", r.confidence),
                ));
            }
            Ok(ElementDetection {
                bbox: clamp_box(r.bbox, w, h, &det_path, &detection_id)?,
                detection_id,
                kind: r.kind,
                text: r.text,
                confidence: r.confidence,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let embedding = match entry.embedding {
        Some(name) => Some(read_json::<Vec<f64>>(&dir.join(name))?),
        None => None,
    };

    Ok(ScreenCapture {
        capture_id: entry.capture_id,
        ordinal: entry.ordinal,
        screenshot: Arc::new(screenshot),
        issues,
        detections,
        embedding,
        device_scale: entry.device_scale.unwrap_or(1.0),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `bundle` in the layout read by [`load_bundle`].
pub fn write_bundle(bundle: &CaptureBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(bundle.captures.len());
    for c in &bundle.captures {
        let stem = format!("{:03}", c.ordinal);
        let screenshot = format!("{stem}.png");
        let png_path = dir.join(&screenshot);
        c.screenshot
            .save_with_format(&png_path, image::ImageFormat::Png)
            .map_err(|source| Error::Raster {
                path: png_path.clone(),
                source,
            })?;

        let issues = format!("{stem}.issues.json");
        let issue_entries: Vec<IssueEntry> = c
            .issues
            .iter()
            .map(|i| IssueEntry {
                id: Some(i.issue_id.clone()),
                category: i.category,
                check_name: i.check_name.clone(),
                message: i.message.clone(),
                bbox: i.bbox.into(),
            })
            .collect();
        write_json(&dir.join(&issues), &issue_entries)?;

        let detections = format!("{stem}.detections.json");
        let det_entries: Vec<DetectionEntry> = c
            .detections
            .iter()
            .map(|d| DetectionEntry {
                id: Some(d.detection_id.clone()),
                kind: d.kind,
                bbox: d.bbox.into(),
                text: d.text.clone(),
                confidence: d.confidence,
            })
            .collect();
        write_json(&dir.join(&detections), &det_entries)?;

        let embedding = match &c.embedding {
            Some(e) => {
                let name = format!("{stem}.embedding.json");
                write_json(&dir.join(&name), e)?;
                Some(name)
            }
            None => None,
        };

        entries.push(ManifestEntry {
            capture_id: c.capture_id.clone(),
            ordinal: c.ordinal,
            screenshot,
            issues: Some(issues),
            detections: Some(detections),
            embedding,
            device_scale: Some(c.device_scale),
        });
    }
    let manifest = Manifest {
        app_id: bundle.app_id.clone(),
        run_id: bundle.run_id.clone(),
        similarity_mode_hint: bundle.similarity_mode_hint,
        captures: entries,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)
}
