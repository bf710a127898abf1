use std::collections::HashMap;

use crate::capture::{associate_issue_with, AccessibilityIssue, CaptureBundle, ElementDetection, ScreenCapture};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::grouping::ScreenGroup;
use crate::matching::{find_best_match_with, preprocess_template, MatchStrategy, PreparedScreen, TemplateRecord};

use super::model::{Anchor, IssueStatus, Occurrence, UniqueIssue};

/// Merges the issues of one screen group into unique issues.
///
/// The representative's issues seed the set. Each issue on another member is
/// traced back to the representative with `find_best_match`; if that fails it
/// is also tried against elements that anchor issues first seen on other
/// members, so an element missing from the representative is still counted
/// once. Issues without a detection merge by check name and box overlap.
pub fn dedupe_group_issues(
    group: &ScreenGroup,
    bundle: &CaptureBundle,
    config: &PipelineConfig,
) -> Result<Vec<UniqueIssue>> {
    let member = |id: &str| {
        bundle
            .capture(id)
            .ok_or_else(|| Error::Config(format!("group {} member {id} is not in the bundle", group.group_id)))
    };
    let rep = member(&group.representative_id)?;
    let mut state = Deduper {
        group_id: group.group_id,
        bundle,
        config,
        uniques: Vec::new(),
        screens: HashMap::new(),
    };

    for issue in &rep.issues {
        let det = associate_issue_with(issue, &rep.detections, config.association_iou);
        state.open(rep, issue, det);
    }
    for id in &group.member_ids {
        if *id == group.representative_id {
            continue;
        }
        let capture = member(id)?;
        let mut templates: HashMap<&str, TemplateRecord> = HashMap::new();
        for issue in &capture.issues {
            match associate_issue_with(issue, &capture.detections, config.association_iou) {
                None => state.merge_raw(capture, issue),
                Some(det) => {
                    if !templates.contains_key(det.detection_id.as_str()) {
                        templates.insert(&det.detection_id, preprocess_template(capture, det)?);
                    }
                    let template = &templates[det.detection_id.as_str()];
                    state.merge_matched(capture, issue, det, template, &rep.capture_id);
                }
            }
        }
    }
    Ok(state.uniques)
}

struct Deduper<'a> {
    group_id: u32,
    bundle: &'a CaptureBundle,
    config: &'a PipelineConfig,
    uniques: Vec<UniqueIssue>,
    screens: HashMap<&'a str, PreparedScreen<'a>>,
}

fn occurrence(capture: &ScreenCapture, issue: &AccessibilityIssue) -> Occurrence {
    Occurrence {
        capture_id: capture.capture_id.clone(),
        issue_id: issue.issue_id.clone(),
        bbox: issue.bbox,
    }
}

impl<'a> Deduper<'a> {
    fn open(&mut self, capture: &ScreenCapture, issue: &AccessibilityIssue, det: Option<&ElementDetection>) {
        let n = self.uniques.len();
        self.uniques.push(UniqueIssue {
            unique_id: format!("g{:04}-u{:04}", self.group_id, n),
            category: issue.category,
            check_name: issue.check_name.clone(),
            message: issue.message.clone(),
            anchor: Anchor {
                group_id: self.group_id,
                capture_id: capture.capture_id.clone(),
                detection_id: det.map(|d| d.detection_id.clone()),
                bbox: det.map_or(issue.bbox, |d| d.bbox),
            },
            occurrences: vec![occurrence(capture, issue)],
            status: IssueStatus::Active,
            ignored_by: None,
        });
    }

    fn same_check(u: &UniqueIssue, issue: &AccessibilityIssue) -> bool {
        u.category == issue.category && u.check_name == issue.check_name
    }

    fn merge_raw(&mut self, capture: &ScreenCapture, issue: &AccessibilityIssue) {
        let min_iou = self.config.raw_dedupe_iou;
        let hit = self.uniques.iter_mut().find(|u| {
            u.anchor.detection_id.is_none() && Self::same_check(u, issue) && u.anchor.bbox.iou(&issue.bbox) >= min_iou
        });
        match hit {
            Some(u) => u.occurrences.push(occurrence(capture, issue)),
            None => self.open(capture, issue, None),
        }
    }

    fn merge_matched(
        &mut self,
        capture: &ScreenCapture,
        issue: &AccessibilityIssue,
        det: &ElementDetection,
        template: &TemplateRecord,
        rep_id: &str,
    ) {
        // Screens to look on: the representative first, then anchors of
        // issues first seen elsewhere, in the order they were opened.
        let mut targets: Vec<String> = vec![rep_id.to_string()];
        for u in &self.uniques {
            if u.anchor.detection_id.is_some()
                && Self::same_check(u, issue)
                && !targets.contains(&u.anchor.capture_id)
            {
                targets.push(u.anchor.capture_id.clone());
            }
        }
        for target in targets {
            let matched = if target == capture.capture_id {
                Some(det.detection_id.clone())
            } else {
                self.match_on(template, &target)
            };
            let Some(matched) = matched else { continue };
            let hit = self.uniques.iter_mut().find(|u| {
                u.anchor.capture_id == target
                    && u.anchor.detection_id.as_deref() == Some(matched.as_str())
                    && Self::same_check(u, issue)
            });
            if let Some(u) = hit {
                u.occurrences.push(occurrence(capture, issue));
                return;
            }
        }
        self.open(capture, issue, Some(det));
    }

    fn match_on(&mut self, template: &TemplateRecord, capture_id: &str) -> Option<String> {
        let bundle = self.bundle;
        let capture = bundle.capture(capture_id)?;
        let screen = self
            .screens
            .entry(capture.capture_id.as_str())
            .or_insert_with(|| PreparedScreen::new(capture));
        find_best_match_with(template, screen, &self.config.matching, MatchStrategy::Heuristics).matched_id
    }
}
