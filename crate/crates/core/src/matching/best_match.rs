//! Finding the counterpart of a template element on a new screen.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::groups::{build_element_groups, group_text, is_icon_only, GroupIndex};
use super::template::{ScaledTemplate, TemplateRecord, SCALE_FACTORS, SEARCH_PADDING};
use super::text::{normalize_text, normalized_similarity};
use crate::capture::{ElementDetection, ElementKind, ScreenCapture};
use crate::geometry::normalized_center_distance;
use crate::raster::GrayPlane;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMethod {
    Text,
    IconTemplate,
    Position,
    GroupedText,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub matched_id: Option<String>,
    pub score: f64,
    pub method: MatchMethod,
}

impl MatchResult {
    pub fn none() -> Self {
        MatchResult {
            matched_id: None,
            score: 0.0,
            method: MatchMethod::None,
        }
    }
}

/// Acceptance thresholds and search parameters for element matching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    pub text_threshold: f64,
    pub icon_threshold: f64,
    pub picture_threshold: f64,
    pub position_threshold: f64,
    /// Search window padding per side, as a fraction of the candidate box.
    pub search_padding: f64,
    /// A grouped candidate loses only to outsiders beating it by more than this.
    pub group_margin: f64,
    pub scale_factors: Vec<f64>,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            text_threshold: 0.90,
            icon_threshold: 0.80,
            picture_threshold: 0.50,
            position_threshold: 0.50,
            search_padding: SEARCH_PADDING,
            group_margin: 0.05,
            scale_factors: SCALE_FACTORS.to_vec(),
        }
    }
}

impl MatchConfig {
    /// Lowest threshold any method can accept with.
    pub fn threshold_for(&self, method: MatchMethod, kind: ElementKind) -> f64 {
        match method {
            MatchMethod::Text | MatchMethod::GroupedText => self.text_threshold,
            MatchMethod::Position => self.position_threshold,
            MatchMethod::IconTemplate if kind == ElementKind::Picture => self.picture_threshold,
            MatchMethod::IconTemplate => self.icon_threshold,
            MatchMethod::None => 0.0,
        }
    }
}

/// Which scoring rules to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchStrategy {
    /// Per-type dispatch with group preference.
    #[default]
    Heuristics,
    /// Multi-scale template matching on every same-kind candidate.
    TemplateOnly,
}

/// A new screen with its groups and luma plane computed once, for matching
/// many templates against it.
pub struct PreparedScreen<'a> {
    capture: &'a ScreenCapture,
    index: GroupIndex,
    gray: GrayPlane,
}

impl<'a> PreparedScreen<'a> {
    pub fn new(capture: &'a ScreenCapture) -> Self {
        PreparedScreen {
            capture,
            index: GroupIndex::new(build_element_groups(&capture.detections)),
            gray: GrayPlane::from_rgb(&capture.screenshot),
        }
    }

    pub fn capture(&self) -> &ScreenCapture {
        self.capture
    }

    fn group_text_of(&self, owner: &ElementDetection) -> Option<String> {
        self.index
            .owned_by(&owner.detection_id)
            .map(|g| group_text(g, &self.capture.detections))
    }
}

/// Best match for the template element on `new_capture` with default settings.
pub fn find_best_match(template: &TemplateRecord, new_capture: &ScreenCapture) -> MatchResult {
    let screen = PreparedScreen::new(new_capture);
    find_best_match_with(template, &screen, &MatchConfig::default(), MatchStrategy::Heuristics)
}

pub fn find_best_match_with(
    template: &TemplateRecord,
    screen: &PreparedScreen<'_>,
    config: &MatchConfig,
    strategy: MatchStrategy,
) -> MatchResult {
    let tpl_index = GroupIndex::new(template.groups.clone());
    let ctx = Context {
        template,
        tpl_index: &tpl_index,
        screen,
        config,
    };
    ctx.best_for(&template.template_element, strategy, true)
}

struct Scored<'a> {
    det: &'a ElementDetection,
    score: f64,
    method: MatchMethod,
    distance: f64,
}

fn better(a: &Scored<'_>, b: &Scored<'_>) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.distance.total_cmp(&b.distance))
        .then_with(|| a.det.detection_id.cmp(&b.det.detection_id))
}

struct Context<'c, 'a> {
    template: &'c TemplateRecord,
    tpl_index: &'c GroupIndex,
    screen: &'c PreparedScreen<'a>,
    config: &'c MatchConfig,
}

enum Rule {
    Text(String),
    GroupedText(String),
    /// Template crop of this element against the candidate (or its icon).
    Crop {
        element: ElementDetection,
        via_icon: bool,
    },
    Position,
}

impl<'c, 'a> Context<'c, 'a> {
    fn best_for(&self, element: &ElementDetection, strategy: MatchStrategy, prefer_group: bool) -> MatchResult {
        let candidates: Vec<&'a ElementDetection> = self
            .screen
            .capture
            .detections
            .iter()
            .filter(|d| d.kind == element.kind)
            .collect();
        if candidates.is_empty() {
            return MatchResult::none();
        }
        let rule = match strategy {
            MatchStrategy::Heuristics => self.rule_for(element),
            MatchStrategy::TemplateOnly => Rule::Crop {
                element: element.clone(),
                via_icon: false,
            },
        };
        let mut passing = self.score_all(element, &rule, &candidates);
        if passing.is_empty() {
            return MatchResult::none();
        }
        passing.sort_by(better);

        let mut chosen = &passing[0];
        if prefer_group && strategy == MatchStrategy::Heuristics {
            if let Some(member) = self.preferred_member(element, &passing) {
                chosen = member;
            }
        }
        MatchResult {
            matched_id: Some(chosen.det.detection_id.clone()),
            score: chosen.score,
            method: chosen.method,
        }
    }

    /// When the template element sits inside a group, match the group first
    /// and favour candidates inside the matched group.
    fn preferred_member<'s>(&self, element: &ElementDetection, passing: &'s [Scored<'a>]) -> Option<&'s Scored<'a>> {
        let tpl_group = self.tpl_index.containing(&element.detection_id)?;
        let owner = self.template.detection(&tpl_group.owner_id)?;
        let owner_match = self.best_for(owner, MatchStrategy::Heuristics, false);
        let new_group = self.screen.index.owned_by(owner_match.matched_id.as_deref()?)?;
        let best_member = passing.iter().find(|s| new_group.contains(&s.det.detection_id))?;
        let best_outside = passing.iter().find(|s| !new_group.contains(&s.det.detection_id));
        match best_outside {
            Some(o) if o.score > best_member.score + self.config.group_margin + 1e-12 => None,
            _ => Some(best_member),
        }
    }

    fn rule_for(&self, element: &ElementDetection) -> Rule {
        let dets = &self.template.all_detections;
        let own_group = self.tpl_index.owned_by(&element.detection_id);
        let crop_self = || Rule::Crop {
            element: element.clone(),
            via_icon: false,
        };
        match element.kind {
            ElementKind::Text => Rule::Text(element.text.clone().unwrap_or_default()),
            ElementKind::Icon | ElementKind::Picture => crop_self(),
            ElementKind::TabButton => match own_group {
                Some(g) if g.anchor_text_id.is_some() => Rule::GroupedText(group_text(g, dets)),
                Some(g) => {
                    let icon = g.contents().next().and_then(|id| self.template.detection(id));
                    match icon {
                        Some(icon) => Rule::Crop {
                            element: icon.clone(),
                            via_icon: true,
                        },
                        None => crop_self(),
                    }
                }
                None => match &element.text {
                    Some(t) if !normalize_text(t).is_empty() => Rule::Text(t.clone()),
                    _ => crop_self(),
                },
            },
            ElementKind::Toggle
            | ElementKind::Checkbox
            | ElementKind::SegmentedControl
            | ElementKind::TextField
            | ElementKind::Slider => {
                let text = own_group.map(|g| group_text(g, dets)).unwrap_or_default();
                if normalize_text(&text).is_empty() {
                    Rule::Position
                } else {
                    Rule::GroupedText(text)
                }
            }
            ElementKind::PageControl | ElementKind::Dialog => Rule::Position,
            ElementKind::Container => match own_group {
                Some(g) if is_icon_only(g, dets) => crop_self(),
                Some(g) => {
                    let text = group_text(g, dets);
                    if normalize_text(&text).is_empty() {
                        crop_self()
                    } else {
                        Rule::GroupedText(text)
                    }
                }
                None => crop_self(),
            },
        }
    }

    fn candidate_text(&self, rule_is_grouped: bool, cand: &ElementDetection) -> String {
        if rule_is_grouped {
            if let Some(t) = self.screen.group_text_of(cand) {
                return t;
            }
        }
        cand.text.clone().unwrap_or_default()
    }

    fn score_all(
        &self,
        element: &ElementDetection,
        rule: &Rule,
        candidates: &[&'a ElementDetection],
    ) -> Vec<Scored<'a>> {
        let new_width = self.screen.capture.width();
        let distance = |c: &ElementDetection| {
            normalized_center_distance(&element.bbox, self.template.source_width, &c.bbox, new_width)
        };
        let scaled = match rule {
            Rule::Crop { element: e, .. } => Some(ScaledTemplate::new(
                &self.template.gray_crop(e),
                self.template.source_width,
                new_width,
                &self.config.scale_factors,
            )),
            _ => None,
        };
        let mut out = Vec::new();
        for &cand in candidates {
            let d = distance(cand);
            let (score, method) = match rule {
                Rule::Text(t) => (
                    normalized_similarity(&normalize_text(t), &normalize_text(&self.candidate_text(false, cand))),
                    MatchMethod::Text,
                ),
                Rule::GroupedText(t) => (
                    normalized_similarity(&normalize_text(t), &normalize_text(&self.candidate_text(true, cand))),
                    MatchMethod::GroupedText,
                ),
                Rule::Crop { via_icon, .. } => {
                    let target = if *via_icon {
                        self.candidate_icon(cand).unwrap_or(cand)
                    } else {
                        cand
                    };
                    let s = scaled
                        .as_ref()
                        .map_or(0.0, |t| t.score(&self.screen.gray, &target.bbox, self.config.search_padding));
                    (s, MatchMethod::IconTemplate)
                }
                Rule::Position => {
                    let s = if candidates.len() == 1 { 1.0 } else { (1.0 - d).clamp(0.0, 1.0) };
                    (s, MatchMethod::Position)
                }
            };
            let threshold = self.config.threshold_for(method, element.kind);
            if score >= threshold {
                out.push(Scored {
                    det: cand,
                    score,
                    method,
                    distance: d,
                });
            }
        }
        out
    }

    fn candidate_icon(&self, cand: &ElementDetection) -> Option<&'a ElementDetection> {
        let g = self.screen.index.owned_by(&cand.detection_id)?;
        g.contents()
            .filter_map(|id| self.screen.capture.detection(id))
            .find(|d| d.kind == ElementKind::Icon)
    }
}
