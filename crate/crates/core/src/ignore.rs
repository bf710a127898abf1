//! Persisted ignore decisions and their re-identification on new reports.
//!
//! Records live in a JSON-lines file, one record state per line; the last
//! line for an id wins, so removing an ignore appends an inactive copy.
//! Snapshot screenshots are stored next to the file, named by SHA-256.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::capture::{CaptureBundle, ElementDetection, IssueCategory, ScreenCapture};
use crate::error::{Error, Result};
use crate::grouping::{ScreenSignature, SimilarityScorer};
use crate::matching::{find_best_match_with, preprocess_template, MatchConfig, MatchStrategy, PreparedScreen, TemplateRecord};
use crate::raster::{decode_png, encode_png, png_base64, png_from_base64};
use crate::report::{IssueStatus, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IgnoreScope {
    Issue,
    CheckName,
    Category,
    Screen,
}

/// A capture as it looked when an ignore was created.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenSnapshot {
    pub capture_id: String,
    pub screenshot_sha256: String,
    pub width: u32,
    pub height: u32,
    pub detections: Vec<ElementDetection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
}

/// The ignored element. Detections and groups come from the snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub template_element: ElementDetection,
    /// PNG of the element crop, base64.
    pub crop_png: String,
    pub source_width: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgnoreRecord {
    pub ignore_id: String,
    pub app_id: String,
    pub scope: IgnoreScope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<IssueCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<Fingerprint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screen_snapshot: Option<ScreenSnapshot>,
    pub active: bool,
    pub created_at: DateTime<Utc>,
}

impl IgnoreRecord {
    fn validate(&self) -> Result<()> {
        let missing = match self.scope {
            IgnoreScope::Issue if self.fingerprint.is_none() => Some("fingerprint"),
            IgnoreScope::Issue if self.check_name.is_none() => Some("check_name"),
            IgnoreScope::Issue | IgnoreScope::Screen if self.screen_snapshot.is_none() => Some("screen_snapshot"),
            IgnoreScope::CheckName if self.check_name.is_none() => Some("check_name"),
            IgnoreScope::Category if self.category.is_none() => Some("category"),
            _ => None,
        };
        match missing {
            Some(field) => Err(Error::InvalidIgnore(format!("{} ignore {} needs {field}", scope_name(self.scope), self.ignore_id))),
            None => Ok(()),
        }
    }
}

fn scope_name(scope: IgnoreScope) -> &'static str {
    match scope {
        IgnoreScope::Issue => "issue",
        IgnoreScope::CheckName => "check_name",
        IgnoreScope::Category => "category",
        IgnoreScope::Screen => "screen",
    }
}

/// What to ignore, as picked in the report.
#[derive(Debug, Clone)]
pub enum IgnoreTarget<'a> {
    Issue {
        capture: &'a ScreenCapture,
        detection_id: &'a str,
        check_name: &'a str,
    },
    CheckName(String),
    Category(IssueCategory),
    Screen(&'a ScreenCapture),
}

/// Append-only ignore file plus its screenshot blob directory.
#[derive(Debug)]
pub struct IgnoreStore {
    path: PathBuf,
    blob_dir: PathBuf,
    records: BTreeMap<String, IgnoreRecord>,
}

impl IgnoreStore {
    /// Opens `path`, creating nothing until the first write.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".blobs");
        let blob_dir = path.with_file_name(name);
        let mut records = BTreeMap::new();
        if path.exists() {
            let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: IgnoreRecord = serde_json::from_str(&line)
                    .map_err(|e| Error::schema(path.display().to_string(), format!("line {}: {e}", n + 1)))?;
                records.insert(rec.ignore_id.clone(), rec);
            }
        }
        Ok(IgnoreStore { path, blob_dir, records })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, ignore_id: &str) -> Option<&IgnoreRecord> {
        self.records.get(ignore_id)
    }

    /// Active and removed records of one app, by id.
    pub fn list(&self, app_id: &str) -> Vec<&IgnoreRecord> {
        self.records.values().filter(|r| r.app_id == app_id).collect()
    }

    pub fn add(&mut self, app_id: &str, target: IgnoreTarget<'_>) -> Result<IgnoreRecord> {
        let ignore_id = self.next_id();
        let mut rec = IgnoreRecord {
            ignore_id,
            app_id: app_id.to_string(),
            scope: IgnoreScope::Category,
            check_name: None,
            category: None,
            fingerprint: None,
            screen_snapshot: None,
            active: true,
            created_at: Utc::now(),
        };
        match target {
            IgnoreTarget::Category(c) => rec.category = Some(c),
            IgnoreTarget::CheckName(name) => {
                rec.scope = IgnoreScope::CheckName;
                rec.check_name = Some(name);
            }
            IgnoreTarget::Screen(capture) => {
                rec.scope = IgnoreScope::Screen;
                rec.screen_snapshot = Some(self.snapshot(capture)?);
            }
            IgnoreTarget::Issue {
                capture,
                detection_id,
                check_name,
            } => {
                let det = capture.detection(detection_id).ok_or_else(|| Error::UnknownDetection {
                    detection_id: detection_id.to_string(),
                    capture_id: capture.capture_id.clone(),
                })?;
                let template = preprocess_template(capture, det)?;
                rec.scope = IgnoreScope::Issue;
                rec.check_name = Some(check_name.to_string());
                rec.fingerprint = Some(Fingerprint {
                    template_element: template.template_element.clone(),
                    crop_png: png_base64(&template.crop)?,
                    source_width: template.source_width,
                });
                rec.screen_snapshot = Some(self.snapshot(capture)?);
            }
        }
        self.insert(rec.clone())?;
        Ok(rec)
    }

    /// Appends an already-built record, e.g. one received over the API.
    pub fn insert(&mut self, rec: IgnoreRecord) -> Result<()> {
        rec.validate()?;
        self.append(&rec)?;
        self.records.insert(rec.ignore_id.clone(), rec);
        Ok(())
    }

    pub fn remove(&mut self, ignore_id: &str) -> Result<IgnoreRecord> {
        let mut rec = self
            .records
            .get(ignore_id)
            .cloned()
            .ok_or_else(|| Error::UnknownIgnore(ignore_id.to_string()))?;
        rec.active = false;
        self.append(&rec)?;
        self.records.insert(rec.ignore_id.clone(), rec.clone());
        Ok(rec)
    }

    /// Active records of `app_id` with their snapshots and templates loaded.
    pub fn resolve(&self, app_id: &str) -> Result<Vec<ResolvedIgnore>> {
        self.records
            .values()
            .filter(|r| r.active && r.app_id == app_id)
            .map(|r| self.resolve_one(r))
            .collect()
    }

    fn resolve_one(&self, rec: &IgnoreRecord) -> Result<ResolvedIgnore> {
        let snapshot = match &rec.screen_snapshot {
            Some(s) => Some(self.load_snapshot(s)?),
            None => None,
        };
        let template = match (&rec.fingerprint, &snapshot) {
            (Some(fp), Some(capture)) => {
                let mut t = preprocess_template(capture, &fp.template_element)?;
                t.crop = png_from_base64(&fp.crop_png)?;
                Some(t)
            }
            _ => None,
        };
        Ok(ResolvedIgnore {
            record: rec.clone(),
            snapshot,
            template,
        })
    }

    fn next_id(&self) -> String {
        let n = self
            .records
            .keys()
            .filter_map(|k| k.strip_prefix("ign-").and_then(|n| n.parse::<u64>().ok()))
            .max()
            .map_or(1, |n| n + 1);
        format!("ign-{n:06}")
    }

    fn append(&self, rec: &IgnoreRecord) -> Result<()> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut line = serde_json::to_string(rec)?;
        line.push('\n');
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| Error::io(&self.path, e))?;
        file.write_all(line.as_bytes()).map_err(|e| Error::io(&self.path, e))?;
        file.sync_data().map_err(|e| Error::io(&self.path, e))
    }

    fn snapshot(&self, capture: &ScreenCapture) -> Result<ScreenSnapshot> {
        let png = encode_png(&capture.screenshot)?;
        let hash = hex::encode(Sha256::digest(&png));
        fs::create_dir_all(&self.blob_dir).map_err(|e| Error::io(&self.blob_dir, e))?;
        let blob = self.blob_dir.join(format!("{hash}.png"));
        if !blob.exists() {
            let tmp = self.blob_dir.join(format!("{hash}.png.tmp"));
            fs::write(&tmp, &png).map_err(|e| Error::io(&tmp, e))?;
            fs::rename(&tmp, &blob).map_err(|e| Error::io(&blob, e))?;
        }
        Ok(ScreenSnapshot {
            capture_id: capture.capture_id.clone(),
            screenshot_sha256: hash,
            width: capture.width(),
            height: capture.height(),
            detections: capture.detections.clone(),
            embedding: capture.embedding.clone(),
        })
    }

    fn load_snapshot(&self, s: &ScreenSnapshot) -> Result<ScreenCapture> {
        let blob = self.blob_dir.join(format!("{}.png", s.screenshot_sha256));
        let bytes = fs::read(&blob).map_err(|e| Error::io(&blob, e))?;
        let screenshot = decode_png(&bytes).map_err(|e| match e {
            Error::Image(source) => Error::Raster { path: blob.clone(), source },
            other => other,
        })?;
        Ok(ScreenCapture {
            capture_id: s.capture_id.clone(),
            ordinal: 0,
            screenshot: Arc::new(screenshot),
            issues: Vec::new(),
            detections: s.detections.clone(),
            embedding: s.embedding.clone(),
            device_scale: 1.0,
        })
    }
}

/// An active record with its stored screen and template rebuilt.
#[derive(Debug, Clone)]
pub struct ResolvedIgnore {
    pub record: IgnoreRecord,
    pub snapshot: Option<ScreenCapture>,
    pub template: Option<TemplateRecord>,
}

/// Moves active issues covered by the ignores into the ignored section.
/// Records that match nothing leave the report unchanged.
pub fn apply_ignores(
    mut report: Report,
    ignores: &[ResolvedIgnore],
    bundle: &CaptureBundle,
    scorer: &SimilarityScorer,
    matching: &MatchConfig,
) -> Report {
    let mut ctx = IgnoreContext {
        bundle,
        scorer,
        matching,
        rep_signatures: HashMap::new(),
        screens: HashMap::new(),
    };
    for ig in ignores {
        let rec = &ig.record;
        if !rec.active || rec.app_id != report.app_id {
            continue;
        }
        let taken = match rec.scope {
            IgnoreScope::Category => {
                let Some(c) = rec.category else { continue };
                report.take_active(|u| u.category == c)
            }
            IgnoreScope::CheckName => {
                let Some(name) = rec.check_name.as_deref() else { continue };
                report.take_active(|u| u.check_name == name && rec.category.is_none_or(|c| c == u.category))
            }
            IgnoreScope::Screen => {
                let Some(snapshot) = &ig.snapshot else { continue };
                let groups: Vec<u32> = ctx
                    .group_scores(&report, snapshot)
                    .into_iter()
                    .filter(|(_, s)| *s > 0.0)
                    .map(|(g, _)| g)
                    .collect();
                report.take_active(|u| groups.contains(&u.anchor.group_id))
            }
            IgnoreScope::Issue => {
                let (Some(snapshot), Some(template), Some(check)) = (&ig.snapshot, &ig.template, &rec.check_name)
                else {
                    continue;
                };
                let best = ctx
                    .group_scores(&report, snapshot)
                    .into_iter()
                    .filter(|(_, s)| *s > 0.0)
                    .min_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                let Some((group, _)) = best else { continue };
                let mut hits = Vec::new();
                for u in report.active_issues() {
                    if u.anchor.group_id != group || &u.check_name != check {
                        continue;
                    }
                    let Some(det) = &u.anchor.detection_id else { continue };
                    if ctx.match_on(template, &u.anchor.capture_id).as_deref() == Some(det.as_str()) {
                        hits.push(u.unique_id.clone());
                    }
                }
                report.take_active(|u| hits.contains(&u.unique_id))
            }
        };
        for mut u in taken {
            u.status = IssueStatus::Ignored;
            u.ignored_by = Some(rec.ignore_id.clone());
            report.ignored_section.push(u);
        }
    }
    report.ignored_section.sort_by(|a, b| a.unique_id.cmp(&b.unique_id));
    report
}

struct IgnoreContext<'a> {
    bundle: &'a CaptureBundle,
    scorer: &'a SimilarityScorer,
    matching: &'a MatchConfig,
    rep_signatures: HashMap<u32, Option<ScreenSignature>>,
    screens: HashMap<String, PreparedScreen<'a>>,
}

impl<'a> IgnoreContext<'a> {
    /// Signed same-screen score of the snapshot against every group.
    fn group_scores(&mut self, report: &Report, snapshot: &ScreenCapture) -> Vec<(u32, f64)> {
        let Ok(sig) = self.scorer.signature(snapshot) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for g in &report.storyboard.groups {
            let rep = self
                .rep_signatures
                .entry(g.group_id)
                .or_insert_with(|| {
                    self.bundle
                        .capture(&g.representative_id)
                        .and_then(|c| self.scorer.signature(c).ok())
                })
                .as_ref();
            if let Some(rep) = rep {
                out.push((g.group_id, self.scorer.score_signatures(&sig, rep, g.mean_embedding.as_deref())));
            }
        }
        out
    }

    fn match_on(&mut self, template: &TemplateRecord, capture_id: &str) -> Option<String> {
        let capture = self.bundle.capture(capture_id)?;
        let screen = self
            .screens
            .entry(capture_id.to_string())
            .or_insert_with(|| PreparedScreen::new(capture));
        find_best_match_with(template, screen, self.matching, MatchStrategy::Heuristics).matched_id
    }
}
