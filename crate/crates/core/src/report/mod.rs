//! De-duplication, false-positive filtering and report assembly.

mod dedupe;
mod fix_info;
mod model;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use rayon::prelude::*;

pub use dedupe::dedupe_group_issues;
pub use fix_info::{fix_info, known_checks};
pub use model::{
    Anchor, CaptureRef, CountTable, GroupSection, IssueStatus, IssueTree, Occurrence, Report, UniqueIssue,
};

use crate::capture::CaptureBundle;
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::grouping::{SimilarityScorer, Storyboard};
use crate::ignore::{apply_ignores, ResolvedIgnore};

/// Screenshot path of a capture inside a report directory.
pub fn screenshot_path(capture_id: &str) -> String {
    format!("screens/{capture_id}.png")
}

/// Splits unique issues into those anchored to a detection that exists on
/// their anchor capture, and the rest, which are marked hidden.
pub fn filter_false_positives(
    issues: Vec<UniqueIssue>,
    bundle: &CaptureBundle,
) -> (Vec<UniqueIssue>, Vec<UniqueIssue>) {
    let (kept, mut hidden): (Vec<_>, Vec<_>) = issues.into_iter().partition(|u| {
        let Some(det) = &u.anchor.detection_id else { return false };
        bundle
            .capture(&u.anchor.capture_id)
            .is_some_and(|c| c.detection(det).is_some())
    });
    for u in &mut hidden {
        u.status = IssueStatus::HiddenFalsePositive;
    }
    (kept, hidden)
}

/// Recomputes app-level and per-group counts from the active issues, and
/// the fix text table.
pub fn summarize(mut report: Report) -> Report {
    for g in &mut report.groups {
        g.counts = CountTable::tally(g.issues.values().flat_map(|m| m.values().flatten()));
    }
    report.summary_counts = CountTable::tally(report.active_issues());
    report.ignored_section.sort_by(|a, b| a.unique_id.cmp(&b.unique_id));
    report.hidden_section.sort_by(|a, b| a.unique_id.cmp(&b.unique_id));
    report.fix_info = report
        .all_issues()
        .map(|u| (u.check_name.clone(), fix_info(u.category, &u.check_name).to_string()))
        .collect::<BTreeMap<_, _>>();
    report
}

/// Report skeleton holding every unique issue as active.
fn skeleton(
    bundle: &CaptureBundle,
    storyboard: &Storyboard,
    scorer: &SimilarityScorer,
    config: &PipelineConfig,
    generated_at: DateTime<Utc>,
    uniques: Vec<Vec<UniqueIssue>>,
) -> Report {
    let captures = bundle
        .captures
        .iter()
        .map(|c| CaptureRef {
            capture_id: c.capture_id.clone(),
            ordinal: c.ordinal,
            group_id: storyboard.group_of(&c.capture_id).unwrap_or(u32::MAX),
            screenshot: screenshot_path(&c.capture_id),
            width: c.width(),
            height: c.height(),
        })
        .collect();
    let groups = storyboard
        .groups
        .iter()
        .map(|g| GroupSection {
            group_id: g.group_id,
            representative_id: g.representative_id.clone(),
            member_ids: g.member_ids.clone(),
            counts: CountTable::default(),
            issues: IssueTree::new(),
        })
        .collect();
    let mut report = Report {
        app_id: bundle.app_id.clone(),
        run_id: bundle.run_id.clone(),
        generated_at,
        config: config.clone(),
        similarity: *scorer,
        storyboard: storyboard.clone(),
        captures,
        input_issue_count: bundle.issue_count(),
        summary_counts: CountTable::default(),
        groups,
        ignored_section: Vec::new(),
        hidden_section: Vec::new(),
        fix_info: BTreeMap::new(),
    };
    for u in uniques.into_iter().flatten() {
        report.insert_active(u);
    }
    report
}

/// Runs de-duplication per group, then ignores, then the false-positive
/// filter, then summarization.
pub fn assemble_report(
    bundle: &CaptureBundle,
    storyboard: &Storyboard,
    scorer: &SimilarityScorer,
    ignores: &[ResolvedIgnore],
    config: &PipelineConfig,
) -> Result<Report> {
    assemble_report_at(bundle, storyboard, scorer, ignores, config, Utc::now())
}

pub fn assemble_report_at(
    bundle: &CaptureBundle,
    storyboard: &Storyboard,
    scorer: &SimilarityScorer,
    ignores: &[ResolvedIgnore],
    config: &PipelineConfig,
    generated_at: DateTime<Utc>,
) -> Result<Report> {
    storyboard.validate_for(bundle)?;
    let uniques = storyboard
        .groups
        .par_iter()
        .map(|g| dedupe_group_issues(g, bundle, config))
        .collect::<Result<Vec<_>>>()?;
    let report = skeleton(bundle, storyboard, scorer, config, generated_at, uniques);
    let mut report = apply_ignores(report, ignores, bundle, scorer, &config.matching);

    let active = report.take_active(|_| true);
    let (kept, hidden) = filter_false_positives(active, bundle);
    for u in kept {
        report.insert_active(u);
    }
    report.hidden_section.extend(hidden);
    Ok(summarize(report))
}
