//! The work behind each subcommand, callable without a process boundary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use auditboard_core::capture::{load_bundle, write_bundle, CaptureBundle, SimilarityMode};
use auditboard_core::config::PipelineConfig;
use auditboard_core::grouping::{build_storyboard, Storyboard};
use auditboard_core::ignore::IgnoreStore;
use auditboard_core::matching::{find_best_match_with, preprocess_template, MatchStrategy, PreparedScreen};
use auditboard_core::metrics::{matching_metrics, pairwise_confusion, storyboard_partition, CorrespondenceJudgment, Metrics};
use auditboard_core::raster::encode_png;
use auditboard_core::report::{assemble_report_at, screenshot_path, Report};
use auditboard_core::synth::{generate_corpus, write_corpus, GoldFile, SynthSpec};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub const REPORT_FILE: &str = "report.json";
pub const BUNDLE_DIR: &str = "bundle";
pub const IGNORE_FILE: &str = "ignores.jsonl";
pub const BUGS_FILE: &str = "bugs.jsonl";

#[derive(Debug, Clone, Default)]
pub struct GenerateOptions {
    pub config: Option<PathBuf>,
    pub similarity: Option<SimilarityMode>,
    pub threshold: Option<f64>,
    /// Defaults to `<out>/ignores.jsonl`.
    pub ignores: Option<PathBuf>,
    /// Pins the report timestamp.
    pub generated_at: Option<DateTime<Utc>>,
}

impl GenerateOptions {
    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p).with_context(|| format!("reading config {}", p.display()))?,
            None => PipelineConfig::default(),
        };
        if self.similarity.is_some() {
            cfg.similarity = self.similarity;
        }
        if self.threshold.is_some() {
            cfg.threshold = self.threshold;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn ignore_path(out: &Path, explicit: Option<&Path>) -> PathBuf {
    explicit.map_or_else(|| out.join(IGNORE_FILE), Path::to_path_buf)
}

/// Builds the report for `bundle`, grouping from scratch unless `storyboard` is given.
pub fn build_report(
    bundle: &CaptureBundle,
    config: &PipelineConfig,
    storyboard: Option<&Storyboard>,
    store: &IgnoreStore,
    generated_at: DateTime<Utc>,
) -> Result<Report> {
    let scorer = config.scorer_for(bundle)?;
    let built;
    let storyboard = match storyboard {
        Some(sb) => sb,
        None => {
            built = build_storyboard(bundle, &scorer)?;
            &built
        }
    };
    let ignores = store.resolve(&bundle.app_id)?;
    Ok(assemble_report_at(bundle, storyboard, &scorer, &ignores, config, generated_at)?)
}

/// Writes `report.json` via a temporary file so readers never see a partial document.
pub fn write_report(report: &Report, out: &Path) -> Result<()> {
    let path = out.join(REPORT_FILE);
    let tmp = out.join(format!("{REPORT_FILE}.tmp"));
    let mut text = serde_json::to_vec_pretty(report)?;
    text.push(b'\n');
    fs::write(&tmp, &text).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, &path).with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

fn write_screens(bundle: &CaptureBundle, out: &Path) -> Result<()> {
    fs::create_dir_all(out.join("screens"))?;
    for c in &bundle.captures {
        let path = out.join(screenshot_path(&c.capture_id));
        fs::write(&path, encode_png(&c.screenshot)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Loads a bundle, builds its report and writes the report directory:
/// `report.json`, `screens/` and a copy of the bundle for later regeneration.
pub fn cmd_generate(bundle_dir: &Path, out: &Path, opts: &GenerateOptions) -> Result<Report> {
    if !bundle_dir.is_dir() {
        bail!("bundle directory {} does not exist", bundle_dir.display());
    }
    let bundle = load_bundle(bundle_dir).with_context(|| format!("loading bundle {}", bundle_dir.display()))?;
    let config = opts.pipeline_config()?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let store = IgnoreStore::open(ignore_path(out, opts.ignores.as_deref()))?;
    let report = build_report(&bundle, &config, None, &store, opts.generated_at.unwrap_or_else(Utc::now))?;
    write_screens(&bundle, out)?;
    write_bundle(&bundle, &out.join(BUNDLE_DIR))?;
    write_report(&report, out)?;
    Ok(report)
}

pub fn print_summary(report: &Report, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(
        w,
        "{} {}: {} captures, {} screens, {} input issues",
        report.app_id,
        report.run_id,
        report.captures.len(),
        report.groups.len(),
        report.input_issue_count
    )?;
    writeln!(
        w,
        "unique issues: {} active, {} ignored, {} hidden as false positives",
        report.summary_counts.total,
        report.ignored_section.len(),
        report.hidden_section.len()
    )?;
    for (category, n) in &report.summary_counts.by_category {
        writeln!(w, "  {:<20} {n}", category.as_str())?;
    }
    Ok(())
}

/// What `eval` was given as predictions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Predictions {
    Report(Box<Report>),
    Grouping(Vec<Vec<String>>),
    Matches(Vec<MatchPrediction>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPrediction {
    pub template_capture: String,
    pub template_detection: String,
    pub target_capture: String,
    pub predicted: Option<String>,
    #[serde(default)]
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub kind: String,
    pub n: usize,
    pub metrics: Metrics,
}

impl EvalOutcome {
    pub fn table(&self) -> String {
        let m = &self.metrics;
        let c = &m.confusion;
        format!(
            "{} (n = {})\n  precision {:.4}\n  recall    {:.4}\n  f1        {:.4}\n  accuracy  {:.4}\n  tp {} fp {} fn {} tn {}\n",
            self.kind, self.n, m.precision, m.recall, m.f1, m.accuracy, c.tp, c.fp, c.fn_, c.tn
        )
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Scores predictions against a `gold.json`. A report or a plain partition is
/// scored as grouping; a list of match predictions as element matching.
pub fn cmd_eval(pred: &Path, gold: &Path) -> Result<EvalOutcome> {
    let gold = GoldFile::load(gold).with_context(|| format!("reading gold {}", gold.display()))?;
    let pred: Predictions = read_json(pred)?;
    let grouping = |groups: Vec<Vec<String>>| -> Result<EvalOutcome> {
        let c = pairwise_confusion(&groups, &gold.grouping)?;
        Ok(EvalOutcome {
            kind: "grouping".into(),
            n: groups.iter().map(Vec::len).sum(),
            metrics: c.metrics(),
        })
    };
    match pred {
        Predictions::Report(r) => grouping(storyboard_partition(&r.storyboard)),
        Predictions::Grouping(g) => grouping(g),
        Predictions::Matches(ms) => {
            let judgments = judge_matches(&ms, &gold)?;
            Ok(EvalOutcome {
                kind: "matching".into(),
                n: judgments.len(),
                metrics: matching_metrics(&judgments),
            })
        }
    }
}

fn judge_matches(preds: &[MatchPrediction], gold: &GoldFile) -> Result<Vec<CorrespondenceJudgment>> {
    let index: std::collections::HashMap<(&str, &str, &str), &Option<String>> = gold
        .correspondences
        .iter()
        .map(|g| ((g.template_capture.as_str(), g.template_detection.as_str(), g.target_capture.as_str()), &g.gold))
        .collect();
    preds
        .iter()
        .map(|p| {
            let key = (p.template_capture.as_str(), p.template_detection.as_str(), p.target_capture.as_str());
            let gold = index
                .get(&key)
                .with_context(|| format!("no gold correspondence for {} on {}", p.template_detection, p.target_capture))?;
            Ok(CorrespondenceJudgment {
                template: p.template_detection.clone(),
                predicted: p.predicted.clone(),
                gold: (*gold).clone(),
            })
        })
        .collect()
}

/// Runs the element matcher over every gold correspondence of a bundle.
pub fn cmd_match(bundle_dir: &Path, gold: &Path, strategy: MatchStrategy, config: &PipelineConfig) -> Result<Vec<MatchPrediction>> {
    let bundle = load_bundle(bundle_dir).with_context(|| format!("loading bundle {}", bundle_dir.display()))?;
    let gold = GoldFile::load(gold)?;
    let mut screens = std::collections::HashMap::new();
    let mut out = Vec::with_capacity(gold.correspondences.len());
    for g in &gold.correspondences {
        let source = bundle.capture(&g.template_capture).with_context(|| format!("unknown capture {}", g.template_capture))?;
        let target = bundle.capture(&g.target_capture).with_context(|| format!("unknown capture {}", g.target_capture))?;
        let det = source
            .detection(&g.template_detection)
            .with_context(|| format!("unknown detection {}", g.template_detection))?;
        let screen = screens.entry(target.capture_id.clone()).or_insert_with(|| PreparedScreen::new(target));
        let start = Instant::now();
        let template = preprocess_template(source, det)?;
        let result = find_best_match_with(&template, screen, &config.matching, strategy);
        out.push(MatchPrediction {
            template_capture: g.template_capture.clone(),
            template_detection: g.template_detection.clone(),
            target_capture: g.target_capture.clone(),
            predicted: result.matched_id,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(out)
}

/// Generates a synthetic corpus under `out` and returns the number of captures.
pub fn cmd_synth(spec: &SynthSpec, out: &Path) -> Result<usize> {
    let apps = generate_corpus(spec)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_corpus(&apps, out)?;
    fs::write(out.join("spec.json"), serde_json::to_vec_pretty(spec)?)?;
    Ok(apps.iter().map(|a| a.bundle.captures.len()).sum())
}

