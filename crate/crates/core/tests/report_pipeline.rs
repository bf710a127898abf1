use std::collections::{BTreeMap, BTreeSet};

use auditboard_core::capture::SimilarityMode;
use auditboard_core::config::PipelineConfig;
use auditboard_core::grouping::{build_storyboard, SimilarityScorer};
use auditboard_core::report::{assemble_report, fix_info, IssueStatus, Report};
use auditboard_core::synth::{generate_app, generate_corpus, SynthApp, SynthSpec, Variation, VariationWeights, Visit};

fn varied(app_count: usize) -> SynthSpec {
    SynthSpec {
        app_count,
        variations: VariationWeights::uniform(0.5),
        ..SynthSpec::default()
    }
}

fn report_for(app: &SynthApp, gold_storyboard: bool) -> Report {
    let scorer = SimilarityScorer::new(SimilarityMode::Structural);
    let sb = if gold_storyboard {
        app.gold.storyboard(&app.bundle)
    } else {
        build_storyboard(&app.bundle, &scorer).unwrap()
    };
    assemble_report(&app.bundle, &sb, &scorer, &[], &PipelineConfig::default()).unwrap()
}

fn occurrence_ids(report: &Report) -> Vec<String> {
    report
        .all_issues()
        .flat_map(|u| u.occurrences.iter().map(|o| o.issue_id.clone()))
        .collect()
}

#[test]
fn every_input_issue_lands_in_exactly_one_section() {
    for app in generate_corpus(&varied(4)).unwrap() {
        for gold in [true, false] {
            let r = report_for(&app, gold);
            let ids = occurrence_ids(&r);
            let unique: BTreeSet<&String> = ids.iter().collect();
            assert_eq!(ids.len(), unique.len());
            let input: BTreeSet<String> = app.bundle.captures.iter().flat_map(|c| c.issues.iter().map(|i| i.issue_id.clone())).collect();
            assert_eq!(unique.into_iter().cloned().collect::<BTreeSet<_>>(), input);
            assert_eq!(r.input_issue_count, input.len());
        }
    }
}

#[test]
fn repeated_findings_collapse_to_one_issue() {
    for app in generate_corpus(&varied(4)).unwrap() {
        let r = report_for(&app, true);
        for (g, members) in app.gold.grouping.iter().enumerate() {
            let mut planted: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
            for p in &app.gold.ledger {
                if let (Some(k), true) = (&p.key, members.contains(&p.capture_id)) {
                    planted.entry(k).or_default().insert(&p.issue_id);
                }
            }
            for (key, ids) in planted {
                let holders: Vec<_> = r
                    .all_issues()
                    .filter(|u| u.occurrences.iter().any(|o| ids.contains(o.issue_id.as_str())))
                    .collect();
                assert_eq!(holders.len(), 1, "{} group {g} {key}", app.bundle.app_id);
                assert_eq!(holders[0].occurrences.len(), ids.len(), "{} group {g} {key}", app.bundle.app_id);
                assert_eq!(holders[0].anchor.group_id, g as u32);
            }
        }
    }
}

#[test]
fn scrolled_row_keeps_one_issue() {
    let spec = SynthSpec {
        planted_issue_rate: 1.0,
        planted_false_positive_rate: 0.0,
        ..SynthSpec::default()
    };
    let app = generate_app(&spec, 2).unwrap();
    let visits = [
        Visit { screen: 0, variation: Variation::None },
        Visit { screen: 0, variation: Variation::Scrolled { offset: 60 } },
    ];
    let (bundle, gold) = app.model.render_run("scroll", &visits).unwrap();
    let scrolled = SynthApp { model: app.model.clone(), bundle, gold };
    let r = report_for(&scrolled, true);
    let keys: BTreeMap<&str, &str> = scrolled.gold.ledger.iter().map(|p| (p.issue_id.as_str(), p.key.as_deref().unwrap())).collect();
    let mut shared = 0;
    for u in r.all_issues() {
        let ks: BTreeSet<&str> = u.occurrences.iter().map(|o| keys[o.issue_id.as_str()]).collect();
        assert_eq!(ks.len(), 1, "{:?}", u.occurrences);
        if u.occurrences.len() == 2 {
            shared += 1;
        }
    }
    // Every element carries an issue, so ledger keys list what each capture shows.
    let shown = |suffix: &str| -> BTreeSet<&str> {
        scrolled.gold.ledger.iter().filter(|p| p.capture_id.ends_with(suffix)).map(|p| p.key.as_deref().unwrap()).collect()
    };
    let (base, moved) = (shown("c000"), shown("c001"));
    let block = |k: &str| k.rsplit_once('/').map_or("", |x| x.0).to_string();
    let both: Vec<&str> = moved.intersection(&base).copied().collect();
    // Rows that lost a neighbour (a slider label scrolled away) may not be recognised.
    let intact = both
        .iter()
        .filter(|k| base.iter().filter(|b| block(b) == block(k)).all(|b| moved.contains(b)))
        .count();
    assert!(intact > 10);
    assert!(shared >= intact && shared <= both.len(), "{shared} merged, {intact} intact, {} visible in both", both.len());
}

#[test]
fn off_element_issues_are_hidden_and_nothing_else_is() {
    let spec = SynthSpec {
        planted_false_positive_rate: 0.6,
        ..varied(4)
    };
    for app in generate_corpus(&spec).unwrap() {
        let r = report_for(&app, false);
        let hidden: BTreeSet<String> = r.hidden_section.iter().flat_map(|u| u.occurrences.iter().map(|o| o.issue_id.clone())).collect();
        let planted: BTreeSet<String> = app.gold.off_element_ids().into_iter().map(String::from).collect();
        assert!(!planted.is_empty());
        assert_eq!(hidden, planted);
        assert!(r.hidden_section.iter().all(|u| u.status == IssueStatus::HiddenFalsePositive && u.anchor.detection_id.is_none()));
    }
}

#[test]
fn counts_and_fix_info_follow_active_issues() {
    let app = generate_app(&varied(1), 0).unwrap();
    let r = report_for(&app, false);
    let active: Vec<_> = r.active_issues().collect();
    assert_eq!(r.summary_counts.total, active.len());
    assert_eq!(r.summary_counts.by_category.len(), 7);
    assert_eq!(r.summary_counts.by_category.values().sum::<usize>(), active.len());
    assert_eq!(r.groups.iter().map(|g| g.counts.total).sum::<usize>(), active.len());
    for u in &active {
        assert_eq!(u.status, IssueStatus::Active);
        assert_eq!(r.fix_info.get(&u.check_name).map(String::as_str), Some(fix_info(u.category, &u.check_name)));
    }
    let by_check: usize = r.summary_counts.by_check.values().flat_map(|m| m.values()).sum();
    assert_eq!(by_check, active.len());
}

#[test]
fn report_serializes_as_one_document() {
    let app = generate_app(&varied(1), 1).unwrap();
    let r = report_for(&app, false);
    let text = serde_json::to_string(&r).unwrap();
    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}
