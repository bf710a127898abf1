//! Pipeline settings, loadable from a TOML file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::capture::{CaptureBundle, SimilarityMode, ASSOCIATION_IOU};
use crate::error::{Error, Result};
use crate::grouping::SimilarityScorer;
use crate::matching::MatchConfig;

/// IoU at which two detection-less issues with the same check are one issue.
pub const RAW_DEDUPE_IOU: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Scorer mode; falls back to the bundle hint, then to structural.
    pub similarity: Option<SimilarityMode>,
    /// Scorer threshold; the mode's default when unset.
    pub threshold: Option<f64>,
    pub association_iou: f64,
    pub raw_dedupe_iou: f64,
    pub matching: MatchConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            similarity: None,
            threshold: None,
            association_iou: ASSOCIATION_IOU,
            raw_dedupe_iou: RAW_DEDUPE_IOU,
            matching: MatchConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matching;
        let unit = [
            ("association_iou", self.association_iou),
            ("raw_dedupe_iou", self.raw_dedupe_iou),
            ("matching.text_threshold", m.text_threshold),
            ("matching.icon_threshold", m.icon_threshold),
            ("matching.picture_threshold", m.picture_threshold),
            ("matching.position_threshold", m.position_threshold),
            ("matching.group_margin", m.group_margin),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        if m.search_padding < 0.0 || !m.search_padding.is_finite() {
            return Err(Error::Config(format!("matching.search_padding must be non-negative, got {}", m.search_padding)));
        }
        if m.scale_factors.is_empty() || m.scale_factors.iter().any(|f| *f <= 0.0 || !f.is_finite()) {
            return Err(Error::Config("matching.scale_factors must be a non-empty list of positive numbers".into()));
        }
        if let Some(t) = self.threshold {
            if t <= 0.0 || !t.is_finite() {
                return Err(Error::Config(format!("threshold must be positive, got {t}")));
            }
        }
        Ok(())
    }

    pub fn mode_for(&self, bundle: &CaptureBundle) -> SimilarityMode {
        self.similarity
            .or(bundle.similarity_mode_hint)
            .unwrap_or(SimilarityMode::Structural)
    }

    /// The scorer for `bundle`, checking that embedding mode has its inputs.
    pub fn scorer_for(&self, bundle: &CaptureBundle) -> Result<SimilarityScorer> {
        let mode = self.mode_for(bundle);
        if mode == SimilarityMode::Embedding && !bundle.has_all_embeddings() {
            return Err(Error::Config(
                "embedding similarity selected but not every capture has an embedding".into(),
            ));
        }
        match self.threshold {
            Some(t) => SimilarityScorer::with_threshold(mode, t),
            None => Ok(SimilarityScorer::new(mode)),
        }
    }
}
