//! Same-screen scoring and storyboard construction.
//!
//! Every scorer returns a signed value: positive means "same screen". The
//! storyboard builder walks captures in order, putting each one into the
//! group with the highest positive score or opening a new group, and records
//! a transition edge whenever the current group changes.

use std::collections::{BTreeMap, BTreeSet};

use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capture::{CaptureBundle, ElementDetection, ElementKind, ScreenCapture, SimilarityMode};
use crate::error::{Error, Result};
use crate::matching::normalize_text;
use crate::raster::{mse, resize_rgb, scaled_height};

/// Embedding distance below which two screens are the same.
pub const EMBEDDING_THRESHOLD: f64 = 0.2;
/// Pixel MSE below which two screens are the same.
pub const PIXEL_MSE_THRESHOLD: f64 = 30.0;
/// Detection-overlap F1 above which two screens are the same.
pub const STRUCTURAL_THRESHOLD: f64 = 0.5;
/// Common raster width for pixel comparisons.
pub const PIXEL_COMPARE_WIDTH: u32 = 256;
/// Bucket size for box dimensions in structural keys.
pub const STRUCTURAL_SIZE_BUCKET: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScorer {
    pub mode: SimilarityMode,
    pub threshold: f64,
}

impl SimilarityScorer {
    pub fn new(mode: SimilarityMode) -> Self {
        SimilarityScorer {
            mode,
            threshold: Self::default_threshold(mode),
        }
    }

    pub fn with_threshold(mode: SimilarityMode, threshold: f64) -> Result<Self> {
        if threshold <= 0.0 || !threshold.is_finite() {
            return Err(Error::Config(format!("similarity threshold must be positive, got {threshold}")));
        }
        Ok(SimilarityScorer { mode, threshold })
    }

    pub fn default_threshold(mode: SimilarityMode) -> f64 {
        match mode {
            SimilarityMode::Embedding => EMBEDDING_THRESHOLD,
            SimilarityMode::Pixel => PIXEL_MSE_THRESHOLD,
            SimilarityMode::Structural => STRUCTURAL_THRESHOLD,
        }
    }

    /// Mode-specific features of one capture.
    pub fn signature(&self, capture: &ScreenCapture) -> Result<ScreenSignature> {
        Ok(match self.mode {
            SimilarityMode::Embedding => ScreenSignature::Embedding(capture.embedding.clone().ok_or_else(|| {
                Error::Config(format!(
                    "embedding similarity needs an embedding for every capture; {} has none",
                    capture.capture_id
                ))
            })?),
            SimilarityMode::Pixel => {
                let h = scaled_height(capture.width(), capture.height(), PIXEL_COMPARE_WIDTH);
                ScreenSignature::Pixel(resize_rgb(&capture.screenshot, PIXEL_COMPARE_WIDTH, h))
            }
            SimilarityMode::Structural => ScreenSignature::Structural(structural_keys(&capture.detections)),
        })
    }

    /// Signed score of a capture signature against a group, given the
    /// group representative's signature and (embedding mode) the group mean.
    pub fn score_signatures(&self, a: &ScreenSignature, rep: &ScreenSignature, group_mean: Option<&[f64]>) -> f64 {
        match (a, rep) {
            (ScreenSignature::Embedding(x), ScreenSignature::Embedding(r)) => {
                let target = group_mean.unwrap_or(r);
                self.threshold - euclidean(x, target)
            }
            (ScreenSignature::Pixel(x), ScreenSignature::Pixel(r)) => {
                let err = if x.dimensions() == r.dimensions() {
                    mse(x, r)
                } else {
                    mse(x, &resize_rgb(r, x.width(), x.height()))
                };
                self.threshold - err
            }
            (ScreenSignature::Structural(x), ScreenSignature::Structural(r)) => multiset_f1(x, r) - self.threshold,
            _ => f64::NEG_INFINITY,
        }
    }

    /// Signed same-screen score of capture `a` against `group`.
    pub fn score(&self, a: &ScreenCapture, group: &ScreenGroup, bundle: &CaptureBundle) -> Result<f64> {
        let rep = bundle
            .capture(&group.representative_id)
            .ok_or_else(|| Error::Config(format!("representative {} not in bundle", group.representative_id)))?;
        let sa = self.signature(a)?;
        let sr = self.signature(rep)?;
        Ok(self.score_signatures(&sa, &sr, group.mean_embedding.as_deref()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScreenSignature {
    Embedding(Vec<f64>),
    Pixel(RgbImage),
    Structural(BTreeMap<StructuralKey, usize>),
}

/// Detection identity used by the structural scorer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StructuralKey {
    Text(ElementKind, String),
    Shape(ElementKind, u32, u32),
}

/// Key multiset of the topmost layer: when a dialog is present only the
/// detections inside the largest dialog count.
pub fn structural_keys(detections: &[ElementDetection]) -> BTreeMap<StructuralKey, usize> {
    let dialog = detections
        .iter()
        .filter(|d| d.kind == ElementKind::Dialog)
        .max_by(|a, b| a.bbox.area().cmp(&b.bbox.area()).then_with(|| b.detection_id.cmp(&a.detection_id)));
    let mut keys = BTreeMap::new();
    for d in detections {
        if let Some(dlg) = dialog {
            if !dlg.bbox.contains_center_of(&d.bbox) {
                continue;
            }
        }
        let text = d.text.as_deref().map(normalize_text).unwrap_or_default();
        let key = if text.is_empty() {
            StructuralKey::Shape(d.kind, d.bbox.w / STRUCTURAL_SIZE_BUCKET, d.bbox.h / STRUCTURAL_SIZE_BUCKET)
        } else {
            StructuralKey::Text(d.kind, text)
        };
        *keys.entry(key).or_insert(0) += 1;
    }
    keys
}

/// `2 |A ∩ B| / (|A| + |B|)` over multisets; 1 when both are empty.
pub fn multiset_f1(a: &BTreeMap<StructuralKey, usize>, b: &BTreeMap<StructuralKey, usize>) -> f64 {
    let total: usize = a.values().sum::<usize>() + b.values().sum::<usize>();
    if total == 0 {
        return 1.0;
    }
    let common: usize = a.iter().map(|(k, n)| (*n).min(b.get(k).copied().unwrap_or(0))).sum();
    2.0 * common as f64 / total as f64
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenGroup {
    pub group_id: u32,
    pub member_ids: Vec<String>,
    /// First member; never changes as the group grows.
    pub representative_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_embedding: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Storyboard {
    pub groups: Vec<ScreenGroup>,
    /// Directed transitions between groups in capture order, no self-loops.
    pub edges: BTreeSet<(u32, u32)>,
}

impl Storyboard {
    pub fn group(&self, group_id: u32) -> Option<&ScreenGroup> {
        self.groups.iter().find(|g| g.group_id == group_id)
    }

    pub fn group_of(&self, capture_id: &str) -> Option<u32> {
        self.groups
            .iter()
            .find(|g| g.member_ids.iter().any(|m| m == capture_id))
            .map(|g| g.group_id)
    }

    /// Checks that the groups partition exactly the bundle's captures and
    /// that edges reference existing groups.
    pub fn validate_for(&self, bundle: &CaptureBundle) -> Result<()> {
        let mut seen = BTreeSet::new();
        for g in &self.groups {
            if !g.member_ids.contains(&g.representative_id) {
                return Err(Error::Config(format!("group {} representative is not a member", g.group_id)));
            }
            for m in &g.member_ids {
                if bundle.capture(m).is_none() {
                    return Err(Error::Config(format!("group {} member {m} is not in the bundle", g.group_id)));
                }
                if !seen.insert(m.as_str()) {
                    return Err(Error::Config(format!("capture {m} is in two groups")));
                }
            }
        }
        if seen.len() != bundle.captures.len() {
            return Err(Error::Config("storyboard does not cover every capture".into()));
        }
        let ids: BTreeSet<u32> = self.groups.iter().map(|g| g.group_id).collect();
        if let Some((a, b)) = self.edges.iter().find(|(a, b)| !ids.contains(a) || !ids.contains(b)) {
            return Err(Error::Config(format!("edge {a}->{b} references a missing group")));
        }
        Ok(())
    }
}

/// Argmax over positive scores; lowest group id wins ties.
fn choose_group(scores: &[(u32, f64)]) -> Option<u32> {
    scores
        .iter()
        .filter(|(_, s)| *s > 0.0)
        .min_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)))
        .map(|(id, _)| *id)
}

fn place(storyboard: &mut Storyboard, capture: &ScreenCapture, target: Option<u32>) -> u32 {
    match target {
        Some(id) => {
            let g = storyboard
                .groups
                .iter_mut()
                .find(|g| g.group_id == id)
                .expect("chosen group exists");
            g.member_ids.push(capture.capture_id.clone());
            if let (Some(mean), Some(x)) = (g.mean_embedding.as_mut(), capture.embedding.as_ref()) {
                let n = g.member_ids.len() as f64;
                for (m, v) in mean.iter_mut().zip(x) {
                    *m += (v - *m) / n;
                }
            }
            id
        }
        None => {
            let id = storyboard.groups.iter().map(|g| g.group_id + 1).max().unwrap_or(0);
            storyboard.groups.push(ScreenGroup {
                group_id: id,
                member_ids: vec![capture.capture_id.clone()],
                representative_id: capture.capture_id.clone(),
                mean_embedding: capture.embedding.clone(),
            });
            id
        }
    }
}

/// Adds one capture to the storyboard and returns its group id.
pub fn assign_screen(
    storyboard: &mut Storyboard,
    capture: &ScreenCapture,
    scorer: &SimilarityScorer,
    bundle: &CaptureBundle,
) -> Result<u32> {
    let scores = storyboard
        .groups
        .iter()
        .map(|g| Ok((g.group_id, scorer.score(capture, g, bundle)?)))
        .collect::<Result<Vec<_>>>()?;
    let target = choose_group(&scores);
    Ok(place(storyboard, capture, target))
}

/// Builds the storyboard by assigning captures in ordinal order.
pub fn build_storyboard(bundle: &CaptureBundle, scorer: &SimilarityScorer) -> Result<Storyboard> {
    let signatures = bundle
        .captures
        .par_iter()
        .map(|c| scorer.signature(c))
        .collect::<Result<Vec<_>>>()?;
    let mut storyboard = Storyboard::default();
    // Index into `signatures` of each group's representative.
    let mut rep_index: Vec<usize> = Vec::new();
    let mut current: Option<u32> = None;

    for (i, capture) in bundle.captures.iter().enumerate() {
        let sig = &signatures[i];
        let scores: Vec<(u32, f64)> = storyboard
            .groups
            .par_iter()
            .zip(rep_index.par_iter())
            .map(|(g, &r)| {
                (
                    g.group_id,
                    scorer.score_signatures(sig, &signatures[r], g.mean_embedding.as_deref()),
                )
            })
            .collect();
        let target = choose_group(&scores);
        let is_new = target.is_none();
        let group = place(&mut storyboard, capture, target);
        if is_new {
            rep_index.push(i);
        }
        if let Some(prev) = current {
            if prev != group {
                storyboard.edges.insert((prev, group));
            }
        }
        current = Some(group);
    }
    Ok(storyboard)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_highest_positive() {
        assert_eq!(choose_group(&[(0, 2.0), (1, 0.5)]), Some(0));
        assert_eq!(choose_group(&[(0, 0.5), (1, 2.0)]), Some(1));
        assert_eq!(choose_group(&[(0, -1.0), (1, -3.0)]), None);
        assert_eq!(choose_group(&[(3, 1.0), (1, 1.0)]), Some(1));
        assert_eq!(choose_group(&[(0, 0.0)]), None);
    }

    #[test]
    fn embedding_scores_are_threshold_minus_distance() {
        let scorer = SimilarityScorer::new(SimilarityMode::Embedding);
        let a = ScreenSignature::Embedding(vec![0.0, 0.1]);
        let r = ScreenSignature::Embedding(vec![0.0, 0.0]);
        assert!((scorer.score_signatures(&a, &r, None) - 0.1).abs() < 1e-12);
        let far = ScreenSignature::Embedding(vec![0.35, 0.0]);
        assert!((scorer.score_signatures(&far, &r, None) + 0.15).abs() < 1e-12);
    }

    #[test]
    fn non_positive_threshold_is_rejected() {
        assert!(SimilarityScorer::with_threshold(SimilarityMode::Pixel, 0.0).is_err());
        assert!(SimilarityScorer::with_threshold(SimilarityMode::Pixel, -1.0).is_err());
    }

    #[test]
    fn multiset_f1_counts_duplicates() {
        let mut a = BTreeMap::new();
        a.insert(StructuralKey::Shape(ElementKind::Icon, 2, 2), 3);
        let mut b = BTreeMap::new();
        b.insert(StructuralKey::Shape(ElementKind::Icon, 2, 2), 1);
        assert!((multiset_f1(&a, &b) - 0.5).abs() < 1e-12);
        assert_eq!(multiset_f1(&BTreeMap::new(), &BTreeMap::new()), 1.0);
    }
}
