use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::capture::IssueCategory;
use crate::config::PipelineConfig;
use crate::geometry::Rect;
use crate::grouping::{SimilarityScorer, Storyboard};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueStatus {
    Active,
    Ignored,
    HiddenFalsePositive,
}

/// Where a unique issue lives: a detection on one capture, or a raw audit
/// box when no detection could be associated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub group_id: u32,
    pub capture_id: String,
    #[serde(default)]
    pub detection_id: Option<String>,
    /// Detection box, or the raw issue box.
    pub bbox: Rect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub capture_id: String,
    pub issue_id: String,
    /// Highlight box on that capture's screenshot.
    pub bbox: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniqueIssue {
    pub unique_id: String,
    pub category: IssueCategory,
    pub check_name: String,
    pub message: String,
    pub anchor: Anchor,
    pub occurrences: Vec<Occurrence>,
    pub status: IssueStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ignored_by: Option<String>,
}

/// Unique issue counts per category and per (category, check name).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub total: usize,
    pub by_category: BTreeMap<IssueCategory, usize>,
    pub by_check: BTreeMap<IssueCategory, BTreeMap<String, usize>>,
}

impl Default for CountTable {
    fn default() -> Self {
        CountTable {
            total: 0,
            by_category: IssueCategory::ALL.into_iter().map(|c| (c, 0)).collect(),
            by_check: BTreeMap::new(),
        }
    }
}

impl CountTable {
    pub fn tally<'a>(issues: impl IntoIterator<Item = &'a UniqueIssue>) -> Self {
        let mut t = CountTable::default();
        for u in issues {
            t.total += 1;
            *t.by_category.entry(u.category).or_insert(0) += 1;
            *t.by_check.entry(u.category).or_default().entry(u.check_name.clone()).or_insert(0) += 1;
        }
        t
    }

    pub fn category(&self, c: IssueCategory) -> usize {
        self.by_category.get(&c).copied().unwrap_or(0)
    }
}

/// Active issues of one screen group, by category then check name.
pub type IssueTree = BTreeMap<IssueCategory, BTreeMap<String, Vec<UniqueIssue>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSection {
    pub group_id: u32,
    pub representative_id: String,
    pub member_ids: Vec<String>,
    pub counts: CountTable,
    pub issues: IssueTree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptureRef {
    pub capture_id: String,
    pub ordinal: u32,
    pub group_id: u32,
    /// Path relative to the report directory.
    pub screenshot: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub app_id: String,
    pub run_id: String,
    pub generated_at: DateTime<Utc>,
    pub config: PipelineConfig,
    pub similarity: SimilarityScorer,
    pub storyboard: Storyboard,
    pub captures: Vec<CaptureRef>,
    /// Number of audit issues in the input bundle.
    pub input_issue_count: usize,
    pub summary_counts: CountTable,
    pub groups: Vec<GroupSection>,
    pub ignored_section: Vec<UniqueIssue>,
    pub hidden_section: Vec<UniqueIssue>,
    /// Fix text for every check name present in the report.
    pub fix_info: BTreeMap<String, String>,
}

impl Report {
    pub fn active_issues(&self) -> impl Iterator<Item = &UniqueIssue> {
        self.groups
            .iter()
            .flat_map(|g| g.issues.values().flat_map(|m| m.values().flatten()))
    }

    pub fn all_issues(&self) -> impl Iterator<Item = &UniqueIssue> {
        self.active_issues()
            .chain(self.ignored_section.iter())
            .chain(self.hidden_section.iter())
    }

    pub fn group(&self, group_id: u32) -> Option<&GroupSection> {
        self.groups.iter().find(|g| g.group_id == group_id)
    }

    pub fn unique_issue(&self, unique_id: &str) -> Option<&UniqueIssue> {
        self.all_issues().find(|u| u.unique_id == unique_id)
    }

    /// Removes and returns the active issues matching `pred`.
    pub fn take_active(&mut self, mut pred: impl FnMut(&UniqueIssue) -> bool) -> Vec<UniqueIssue> {
        let mut taken = Vec::new();
        for g in &mut self.groups {
            for checks in g.issues.values_mut() {
                for list in checks.values_mut() {
                    let (out, keep): (Vec<_>, Vec<_>) = std::mem::take(list).into_iter().partition(|u| pred(u));
                    *list = keep;
                    taken.extend(out);
                }
                checks.retain(|_, l| !l.is_empty());
            }
            g.issues.retain(|_, m| !m.is_empty());
        }
        taken
    }

    /// Files an active issue under its group, category and check.
    pub fn insert_active(&mut self, issue: UniqueIssue) {
        if let Some(g) = self.groups.iter_mut().find(|g| g.group_id == issue.anchor.group_id) {
            let list = g
                .issues
                .entry(issue.category)
                .or_default()
                .entry(issue.check_name.clone())
                .or_default();
            let at = list.partition_point(|u| u.unique_id < issue.unique_id);
            list.insert(at, issue);
        }
    }
}
