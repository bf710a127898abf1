//! End-to-end acceptance checks on the synthetic corpus. Prints one line per
//! criterion and exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use auditboard::commands::{cmd_generate, GenerateOptions, REPORT_FILE};
use auditboard_core::capture::{write_bundle, CaptureBundle, SimilarityMode};
use auditboard_core::config::PipelineConfig;
use auditboard_core::grouping::{build_storyboard, ScreenGroup, SimilarityScorer, Storyboard};
use auditboard_core::ignore::{IgnoreStore, IgnoreTarget};
use auditboard_core::matching::{find_best_match_with, preprocess_template, MatchConfig, MatchStrategy, PreparedScreen};
use auditboard_core::metrics::{
    matching_confusion, matching_metrics, pairwise_confusion, pairwise_grouping_metrics, storyboard_partition, Confusion,
    CorrespondenceJudgment, Metrics,
};
use auditboard_core::report::{assemble_report, Report};
use auditboard_core::synth::{generate_app, generate_corpus, GoldCorrespondence, SynthApp, SynthSpec, Variation, VariationWeights, Visit};
use rand::seq::IndexedRandom;
use rand::SeedableRng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn plain_corpus() -> SynthSpec {
    SynthSpec {
        seed: 7,
        app_count: 20,
        screens_per_app: 30,
        ..SynthSpec::default()
    }
}

fn varied_corpus() -> SynthSpec {
    SynthSpec {
        variations: VariationWeights::uniform(1.0),
        ..plain_corpus()
    }
}

fn fmt(m: &Metrics) -> String {
    format!("P {:.4} R {:.4} F1 {:.4}", m.precision, m.recall, m.f1)
}

fn grouping(apps: &[SynthApp], mode: SimilarityMode) -> Result<Metrics, String> {
    let scorer = SimilarityScorer::new(mode);
    let mut c = Confusion::default();
    for a in apps {
        let sb = build_storyboard(&a.bundle, &scorer).map_err(|e| e.to_string())?;
        c = c + pairwise_confusion(&storyboard_partition(&sb), &a.gold.grouping).map_err(|e| e.to_string())?;
    }
    Ok(c.metrics())
}

fn exact_duplicates() -> Outcome {
    let apps = generate_corpus(&plain_corpus()).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let m = grouping(&apps, SimilarityMode::Pixel)?;
    let secs = start.elapsed().as_secs_f64();
    let n: usize = apps.iter().map(|a| a.bundle.captures.len()).sum();
    ensure!(n == 600, "corpus has {n} captures");
    ensure!(m.precision == 1.0 && m.recall == 1.0 && m.f1 == 1.0, "pixel grouping {}", fmt(&m));
    ensure!(secs < 60.0, "grouping took {secs:.1} s");
    Ok(format!("pixel grouping {} on {n} captures in {secs:.2} s", fmt(&m)))
}

fn grouping_with_variations() -> Outcome {
    let apps = generate_corpus(&varied_corpus()).map_err(|e| e.to_string())?;
    let varied = apps
        .iter()
        .flat_map(|a| &a.gold.visits)
        .filter(|v| v.variation != Variation::None)
        .count();
    ensure!(varied > 0, "no varied captures");
    let m = grouping(&apps, SimilarityMode::Structural)?;
    ensure!(m.f1 >= 0.90, "structural grouping {}", fmt(&m));
    Ok(format!("structural grouping {} ({varied} varied captures)", fmt(&m)))
}

struct MatchRun {
    metrics: Metrics,
    mean_secs: f64,
}

fn run_matcher(apps: &HashMap<String, &SynthApp>, sample: &[&GoldCorrespondence], strategy: MatchStrategy) -> Result<MatchRun, String> {
    let config = MatchConfig::default();
    let mut screens: HashMap<&str, PreparedScreen<'_>> = HashMap::new();
    let mut judgments = Vec::with_capacity(sample.len());
    let mut total = 0.0;
    for g in sample {
        let app = apps[g.template_capture.rsplit_once('-').unwrap().0];
        let source = app.bundle.capture(&g.template_capture).ok_or("unknown template capture")?;
        let target = app.bundle.capture(&g.target_capture).ok_or("unknown target capture")?;
        let det = source.detection(&g.template_detection).ok_or("unknown template detection")?;
        let screen = screens.entry(&g.target_capture).or_insert_with(|| PreparedScreen::new(target));
        let start = Instant::now();
        let tpl = preprocess_template(source, det).map_err(|e| e.to_string())?;
        let r = find_best_match_with(&tpl, screen, &config, strategy);
        total += start.elapsed().as_secs_f64();
        judgments.push(g.judge(r.matched_id));
    }
    Ok(MatchRun {
        metrics: matching_metrics(&judgments),
        mean_secs: total / sample.len() as f64,
    })
}

/// Both matching criteria share one sample and one pair of runs.
fn matching() -> Result<(MatchRun, MatchRun, usize), String> {
    let apps = generate_corpus(&varied_corpus()).map_err(|e| e.to_string())?;
    let by_run: HashMap<String, &SynthApp> = apps
        .iter()
        .map(|a| (format!("{}-{}", a.bundle.app_id, a.bundle.run_id), a))
        .collect();
    let all: Vec<&GoldCorrespondence> = apps.iter().flat_map(|a| &a.gold.correspondences).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let sample: Vec<&GoldCorrespondence> = all.choose_multiple(&mut rng, 1500.min(all.len())).copied().collect();
    let heuristics = run_matcher(&by_run, &sample, MatchStrategy::Heuristics)?;
    let template_only = run_matcher(&by_run, &sample, MatchStrategy::TemplateOnly)?;
    Ok((heuristics, template_only, sample.len()))
}

fn matching_accuracy(runs: &Result<(MatchRun, MatchRun, usize), String>) -> Outcome {
    let (h, t, n) = runs.as_ref().map_err(Clone::clone)?;
    ensure!(*n >= 1000, "only {n} gold correspondences");
    ensure!(h.metrics.f1 >= 0.95, "heuristics {}", fmt(&h.metrics));
    ensure!(h.metrics.f1 > t.metrics.f1, "heuristics F1 {:.4} vs template-only {:.4}", h.metrics.f1, t.metrics.f1);
    Ok(format!("{n} correspondences: heuristics F1 {:.4} > template-only F1 {:.4}", h.metrics.f1, t.metrics.f1))
}

fn matching_speed(runs: &Result<(MatchRun, MatchRun, usize), String>) -> Outcome {
    let (h, t, _) = runs.as_ref().map_err(Clone::clone)?;
    let ratio = t.mean_secs / h.mean_secs;
    ensure!(h.mean_secs <= t.mean_secs / 2.0, "heuristics {:.3} ms vs template-only {:.3} ms", h.mean_secs * 1e3, t.mean_secs * 1e3);
    Ok(format!("per template {:.3} ms vs {:.3} ms ({ratio:.1}x)", h.mean_secs * 1e3, t.mean_secs * 1e3))
}

fn report_for(a: &SynthApp, sb: &Storyboard, scorer: &SimilarityScorer) -> Result<Report, String> {
    assemble_report(&a.bundle, sb, scorer, &[], &PipelineConfig::default()).map_err(|e| e.to_string())
}

/// Every input issue id appears in exactly one occurrence of one section.
fn conserved(a: &SynthApp, r: &Report) -> bool {
    let ids: Vec<&str> = r.all_issues().flat_map(|u| u.occurrences.iter().map(|o| o.issue_id.as_str())).collect();
    let unique: BTreeSet<&str> = ids.iter().copied().collect();
    let input: BTreeSet<&str> = a.bundle.captures.iter().flat_map(|c| c.issues.iter().map(|i| i.issue_id.as_str())).collect();
    ids.len() == unique.len() && unique == input
}

fn dedupe_conservation() -> Outcome {
    let apps = generate_corpus(&varied_corpus()).map_err(|e| e.to_string())?;
    let scorer = SimilarityScorer::new(SimilarityMode::Structural);
    let (mut sets, mut runs) = (0, 0);
    for a in &apps {
        let gold_sb = a.gold.storyboard(&a.bundle);
        let predicted = build_storyboard(&a.bundle, &scorer).map_err(|e| e.to_string())?;
        for sb in [&gold_sb, &predicted] {
            let r = report_for(a, sb, &scorer)?;
            ensure!(conserved(a, &r), "{}: issue conservation broken", a.bundle.app_id);
            runs += 1;
        }
        let r = report_for(a, &gold_sb, &scorer)?;
        // Planted copies of one issue: same element key and check within a gold group.
        for (gi, members) in a.gold.grouping.iter().enumerate() {
            let mut copies: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
            for p in &a.gold.ledger {
                if let Some(k) = &p.key {
                    if members.contains(&p.capture_id) {
                        copies.entry(k).or_default().insert(&p.issue_id);
                    }
                }
            }
            for (key, ids) in copies {
                let holders: Vec<_> = r
                    .all_issues()
                    .filter(|u| u.anchor.group_id == gi as u32 && u.occurrences.iter().any(|o| ids.contains(o.issue_id.as_str())))
                    .collect();
                ensure!(
                    holders.len() == 1 && holders[0].occurrences.len() == ids.len(),
                    "{} group {gi} {key}: {} copies spread over {} unique issues",
                    a.bundle.app_id,
                    ids.len(),
                    holders.len()
                );
                sets += 1;
            }
        }
    }
    Ok(format!("{sets} planted copy sets collapse to one issue each; conservation holds on {runs} runs"))
}

fn false_positive_filter() -> Outcome {
    let apps = generate_corpus(&varied_corpus()).map_err(|e| e.to_string())?;
    let scorer = SimilarityScorer::new(SimilarityMode::Structural);
    let mut planted_total = 0;
    for a in &apps {
        let sb = build_storyboard(&a.bundle, &scorer).map_err(|e| e.to_string())?;
        let r = report_for(a, &sb, &scorer)?;
        let hidden: BTreeSet<&str> = r
            .hidden_section
            .iter()
            .flat_map(|u| u.occurrences.iter().map(|o| o.issue_id.as_str()))
            .collect();
        let planted: BTreeSet<&str> = a.gold.off_element_ids().into_iter().collect();
        ensure!(
            hidden == planted,
            "{}: {} hidden but not planted, {} planted but not hidden",
            a.bundle.app_id,
            hidden.difference(&planted).count(),
            planted.difference(&hidden).count()
        );
        planted_total += planted.len();
    }
    ensure!(planted_total > 0, "no planted false positives");
    Ok(format!("hidden section equals the {planted_total} planted off-element issues"))
}

fn generate(bundle: &CaptureBundle, root: &Path, name: &str, ignores: &Path) -> Result<Report, String> {
    let input = root.join(format!("{name}-bundle"));
    write_bundle(bundle, &input).map_err(|e| e.to_string())?;
    let opts = GenerateOptions {
        ignores: Some(ignores.to_path_buf()),
        ..GenerateOptions::default()
    };
    cmd_generate(&input, &root.join(name), &opts).map_err(|e| format!("{e:#}"))
}

fn ignore_round_trip() -> Outcome {
    let spec = SynthSpec {
        planted_issue_rate: 0.5,
        ..SynthSpec::default()
    };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let ignores = dir.path().join("ignores.jsonl");
    let mut followed = 0;
    for index in 0..4 {
        let app = generate_app(&spec, index).map_err(|e| e.to_string())?;
        let screen = index % app.model.screen_count();
        let plain = [Visit { screen, variation: Variation::None }];
        let scrolled = [Visit {
            screen,
            variation: Variation::Scrolled {
                offset: app.model.max_scroll(screen).min(60),
            },
        }];
        let (run1, gold1) = app.model.render_run("run1", &plain).map_err(|e| e.to_string())?;
        let (run2, gold2) = app.model.render_run("run2", &scrolled).map_err(|e| e.to_string())?;
        let key1: HashMap<&str, &str> = gold1.ledger.iter().filter_map(|p| Some((p.issue_id.as_str(), p.key.as_deref()?))).collect();
        let key2: HashMap<&str, &str> = gold2.ledger.iter().filter_map(|p| Some((p.issue_id.as_str(), p.key.as_deref()?))).collect();
        let surviving: BTreeSet<&str> = key2.values().copied().collect();

        let name1 = format!("{}-run1", run1.app_id);
        let first = generate(&run1, dir.path(), &name1, &ignores)?;
        let Some(pick) = first
            .active_issues()
            .find(|u| u.anchor.detection_id.is_some() && key1.get(u.occurrences[0].issue_id.as_str()).is_some_and(|k| surviving.contains(k)))
            .cloned()
        else {
            continue;
        };
        let key = key1[pick.occurrences[0].issue_id.as_str()];
        let rec = {
            let mut store = IgnoreStore::open(&ignores).map_err(|e| e.to_string())?;
            store
                .add(
                    &run1.app_id,
                    IgnoreTarget::Issue {
                        capture: run1.capture(&pick.anchor.capture_id).ok_or("anchor capture missing")?,
                        detection_id: pick.anchor.detection_id.as_deref().unwrap(),
                        check_name: &pick.check_name,
                    },
                )
                .map_err(|e| e.to_string())?
        };

        let name2 = format!("{}-run2", run2.app_id);
        let second = generate(&run2, dir.path(), &name2, &ignores)?;
        let ignored: Vec<&str> = second.ignored_section.iter().map(|u| key2[u.occurrences[0].issue_id.as_str()]).collect();
        ensure!(ignored == [key], "{}: ignored {ignored:?}, expected [{key}]", run2.app_id);
        ensure!(
            !second.active_issues().any(|u| key2.get(u.occurrences[0].issue_id.as_str()) == Some(&key)),
            "{}: ignored issue still active",
            run2.app_id
        );

        IgnoreStore::open(&ignores)
            .and_then(|mut s| s.remove(&rec.ignore_id))
            .map_err(|e| e.to_string())?;
        let third = generate(&run2, dir.path(), &format!("{name2}-again"), &ignores)?;
        ensure!(third.ignored_section.is_empty(), "{}: ignore survived removal", run2.app_id);
        ensure!(
            third.active_issues().any(|u| key2.get(u.occurrences[0].issue_id.as_str()) == Some(&key)),
            "{}: issue not restored",
            run2.app_id
        );
        followed += 1;
    }
    ensure!(followed > 0, "no issue survived scrolling");
    Ok(format!("{followed} issue ignores followed into scrolled reruns and restored on removal"))
}

fn metric_arithmetic() -> Outcome {
    let j = |p: Option<&str>, g: Option<&str>| CorrespondenceJudgment {
        template: "t".into(),
        predicted: p.map(String::from),
        gold: g.map(String::from),
    };
    let js = [j(Some("x"), Some("x")), j(Some("y"), Some("y")), j(Some("z"), Some("w")), j(None, Some("v"))];
    ensure!(matching_confusion(&js) == Confusion { tp: 2, fp: 1, fn_: 1, tn: 0 }, "matching confusion");
    let m = matching_metrics(&js);
    let third = 2.0 / 3.0;
    ensure!(
        (m.precision - third).abs() < 1e-12 && (m.recall - third).abs() < 1e-12 && (m.f1 - third).abs() < 1e-12,
        "matching metrics {}",
        fmt(&m)
    );

    let sb = |groups: &[&[&str]]| Storyboard {
        groups: groups
            .iter()
            .enumerate()
            .map(|(i, g)| ScreenGroup {
                group_id: i as u32,
                member_ids: g.iter().map(|s| s.to_string()).collect(),
                representative_id: g[0].to_string(),
                mean_embedding: None,
            })
            .collect(),
        edges: BTreeSet::new(),
    };
    let gold: Vec<Vec<String>> = vec![vec!["A".into(), "B".into()], vec!["C".into()]];
    let split = pairwise_grouping_metrics(&sb(&[&["A"], &["B"], &["C"]]), &gold).map_err(|e| e.to_string())?;
    ensure!(split.confusion == Confusion { tp: 0, fp: 0, fn_: 1, tn: 2 }, "split confusion");
    ensure!(split.recall == 0.0 && (split.accuracy - third).abs() < 1e-12, "split metrics");
    let singles: Vec<Vec<String>> = vec![vec!["A".into()], vec!["B".into()], vec!["C".into()]];
    let merged = pairwise_grouping_metrics(&sb(&[&["A", "B", "C"]]), &singles).map_err(|e| e.to_string())?;
    ensure!(merged.confusion == Confusion { tp: 0, fp: 3, fn_: 0, tn: 0 }, "merged confusion");
    ensure!(merged.precision == 0.0 && merged.accuracy == 0.0, "merged metrics");

    let mut checked = 0;
    for tp in 0..12u64 {
        for fp in 0..12 {
            for fn_ in 0..12 {
                let m = Confusion { tp, fp, fn_, tn: 5 }.metrics();
                let harmonic = if m.precision + m.recall == 0.0 {
                    0.0
                } else {
                    2.0 * m.precision * m.recall / (m.precision + m.recall)
                };
                ensure!((m.f1 - harmonic).abs() < 1e-9, "F1 off harmonic mean at {tp}/{fp}/{fn_}");
                checked += 1;
            }
        }
    }
    Ok(format!("hand examples exact; F1 is the harmonic mean on {checked} confusions"))
}

fn strip_timestamp(bytes: &[u8]) -> Vec<u8> {
    String::from_utf8_lossy(bytes)
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"generated_at\""))
        .collect::<Vec<_>>()
        .join("\n")
        .into_bytes()
}

fn determinism() -> Outcome {
    let app = generate_app(&varied_corpus(), 5).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("bundle");
    write_bundle(&app.bundle, &input).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        cmd_generate(&input, &out, &GenerateOptions::default()).map_err(|e| format!("{e:#}"))?;
        outputs.push(std::fs::read(out.join(REPORT_FILE)).map_err(|e| e.to_string())?);
    }
    ensure!(outputs[0] != strip_timestamp(&outputs[0]), "no timestamp line found");
    ensure!(strip_timestamp(&outputs[0]) == strip_timestamp(&outputs[1]), "reports differ beyond the timestamp");
    Ok(format!("two reports of {} bytes identical apart from generated_at", outputs[0].len()))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut failed = 0;
    let mut report = |n: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {n} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} FAIL  {name}: {detail}");
            }
        }
    };
    report(1, "grouping of exact duplicates", &exact_duplicates);
    report(2, "grouping with variations", &grouping_with_variations);
    let runs = matching();
    report(3, "matching accuracy", &|| matching_accuracy(&runs));
    report(4, "matching speed", &|| matching_speed(&runs));
    report(5, "de-duplication and conservation", &dedupe_conservation);
    report(6, "false-positive filter", &false_positive_filter);
    report(7, "ignore round trip", &ignore_round_trip);
    report(8, "metric arithmetic", &metric_arithmetic);
    report(9, "deterministic reports", &determinism);
    println!("acceptance: {} of 9 passed in {:.1} s", 9 - failed, started.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
