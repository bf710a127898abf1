use std::collections::BTreeMap;

use auditboard_core::capture::{CaptureBundle, IssueCategory, SimilarityMode};
use auditboard_core::config::PipelineConfig;
use auditboard_core::grouping::{build_storyboard, SimilarityScorer};
use auditboard_core::ignore::{IgnoreScope, IgnoreStore, IgnoreTarget};
use auditboard_core::report::{assemble_report, IssueStatus, Report};
use auditboard_core::synth::{generate_app, GoldFile, SynthApp, SynthSpec, Variation, Visit};
use auditboard_core::Error;

fn report(bundle: &CaptureBundle, store: &IgnoreStore) -> Report {
    let scorer = SimilarityScorer::new(SimilarityMode::Structural);
    let sb = build_storyboard(bundle, &scorer).unwrap();
    let ignores = store.resolve(&bundle.app_id).unwrap();
    assemble_report(bundle, &sb, &scorer, &ignores, &PipelineConfig::default()).unwrap()
}

fn app() -> SynthApp {
    generate_app(
        &SynthSpec {
            planted_issue_rate: 0.5,
            planted_false_positive_rate: 0.0,
            ..SynthSpec::default()
        },
        3,
    )
    .unwrap()
}

fn planted_keys(gold: &GoldFile) -> BTreeMap<String, String> {
    gold.ledger.iter().map(|p| (p.issue_id.clone(), p.key.clone().unwrap_or_default())).collect()
}

#[test]
fn records_survive_reopening_and_removal_appends() {
    let app = app();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ignores.jsonl");
    let mut store = IgnoreStore::open(&path).unwrap();
    let c = &app.bundle.captures[0];
    let det = c.detections.iter().find(|d| d.text.is_some()).unwrap();
    let a = store.add("app03", IgnoreTarget::Category(IssueCategory::Contrast)).unwrap();
    let b = store.add("app03", IgnoreTarget::CheckName("Text clipped".into())).unwrap();
    let s = store.add("app03", IgnoreTarget::Screen(c)).unwrap();
    let i = store
        .add(
            "app03",
            IgnoreTarget::Issue {
                capture: c,
                detection_id: &det.detection_id,
                check_name: "Contrast failed",
            },
        )
        .unwrap();
    assert_eq!(
        [&a.ignore_id, &b.ignore_id, &s.ignore_id, &i.ignore_id],
        ["ign-000001", "ign-000002", "ign-000003", "ign-000004"]
    );
    assert_eq!(i.scope, IgnoreScope::Issue);
    store.remove(&b.ignore_id).unwrap();
    assert!(matches!(store.remove("ign-999999"), Err(Error::UnknownIgnore(_))));

    let reopened = IgnoreStore::open(&path).unwrap();
    assert_eq!(reopened.list("app03").len(), 4);
    assert!(!reopened.get(&b.ignore_id).unwrap().active);
    assert_eq!(reopened.get(&i.ignore_id), Some(&i));
    let resolved = reopened.resolve("app03").unwrap();
    assert_eq!(resolved.len(), 3);
    let snap = resolved.iter().find(|r| r.record.ignore_id == s.ignore_id).unwrap().snapshot.as_ref().unwrap();
    assert_eq!(snap.screenshot, c.screenshot);
    assert!(reopened.resolve("someone-else").unwrap().is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 5);
}

#[test]
fn category_and_check_ignores_move_every_match() {
    let app = app();
    let dir = tempfile::tempdir().unwrap();
    let mut store = IgnoreStore::open(dir.path().join("ig.jsonl")).unwrap();
    let before = report(&app.bundle, &store);
    let check = before.active_issues().next().unwrap().check_name.clone();
    store.add("app03", IgnoreTarget::Category(IssueCategory::Contrast)).unwrap();
    store.add("app03", IgnoreTarget::CheckName(check.clone())).unwrap();
    let after = report(&app.bundle, &store);
    assert!(after.active_issues().all(|u| u.category != IssueCategory::Contrast && u.check_name != check));
    let moved = before.active_issues().filter(|u| u.category == IssueCategory::Contrast || u.check_name == check).count();
    assert_eq!(after.ignored_section.len(), moved);
    assert!(after.ignored_section.iter().all(|u| u.status == IssueStatus::Ignored && u.ignored_by.is_some()));
}

#[test]
fn screen_ignore_covers_the_whole_group_only() {
    let app = app();
    let dir = tempfile::tempdir().unwrap();
    let mut store = IgnoreStore::open(dir.path().join("ig.jsonl")).unwrap();
    let before = report(&app.bundle, &store);
    let target = before.groups.iter().find(|g| g.counts.total > 0).unwrap();
    let capture = app.bundle.capture(&target.representative_id).unwrap();
    let rec = store.add("app03", IgnoreTarget::Screen(capture)).unwrap();
    let after = report(&app.bundle, &store);
    assert_eq!(after.ignored_section.len(), target.counts.total);
    assert!(after.ignored_section.iter().all(|u| u.anchor.group_id == target.group_id && u.ignored_by.as_deref() == Some(rec.ignore_id.as_str())));
    assert_eq!(after.summary_counts.total + target.counts.total, before.summary_counts.total);
}

#[test]
fn issue_ignore_follows_the_element_into_a_scrolled_run() {
    let app = app();
    let dir = tempfile::tempdir().unwrap();
    let mut store = IgnoreStore::open(dir.path().join("ig.jsonl")).unwrap();
    let screen = 0;
    let (run1, gold1) = app.model.render_run("run1", &[Visit { screen, variation: Variation::None }]).unwrap();
    let (run2, gold2) = app
        .model
        .render_run("run2", &[Visit { screen, variation: Variation::Scrolled { offset: 50 } }])
        .unwrap();
    let keys1 = planted_keys(&gold1);
    let keys2 = planted_keys(&gold2);
    let first = report(&run1, &store);
    // An issue whose element is still fully on screen after scrolling.
    let pick = first
        .active_issues()
        .find(|u| u.anchor.detection_id.is_some() && keys2.values().any(|k| *k == keys1[&u.occurrences[0].issue_id]))
        .unwrap()
        .clone();
    let key = keys1[&pick.occurrences[0].issue_id].clone();
    let rec = store
        .add(
            &run1.app_id,
            IgnoreTarget::Issue {
                capture: run1.capture(&pick.anchor.capture_id).unwrap(),
                detection_id: pick.anchor.detection_id.as_deref().unwrap(),
                check_name: &pick.check_name,
            },
        )
        .unwrap();

    let second = report(&run2, &store);
    assert_eq!(second.ignored_section.len(), 1);
    assert_eq!(keys2[&second.ignored_section[0].occurrences[0].issue_id], key);
    assert_eq!(second.ignored_section[0].ignored_by.as_deref(), Some(rec.ignore_id.as_str()));

    store.remove(&rec.ignore_id).unwrap();
    let third = report(&run2, &store);
    assert!(third.ignored_section.is_empty());
    assert!(third.active_issues().any(|u| keys2[&u.occurrences[0].issue_id] == key));
}
