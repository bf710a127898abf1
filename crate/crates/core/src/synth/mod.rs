//! Deterministic synthetic apps with ground truth: which captures show the
//! same screen, which detections are the same element, and which issues were
//! planted where.

mod model;
mod paint;
mod words;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use model::{AppModel, GroupKey, PlannedIssue, Variation, Visit, EMBEDDING_DIM, SCREEN_H, SCREEN_W};

use crate::capture::{write_bundle, CaptureBundle};
use crate::error::{Error, Result};
use crate::grouping::{ScreenGroup, Storyboard};
use crate::metrics::CorrespondenceJudgment;

pub const GOLD_FILE: &str = "gold.json";

/// Relative frequency of each "same screen" variation. A plain revisit has
/// weight 1, so all zeros means every revisit is pixel-identical.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationWeights {
    pub same_data_change: f64,
    pub scrolled: f64,
    pub expanded_collapsed: f64,
    pub keyboard: f64,
    pub dialog_overlay: f64,
    pub modal_over_different_content: f64,
}

impl VariationWeights {
    pub fn uniform(w: f64) -> Self {
        VariationWeights {
            same_data_change: w,
            scrolled: w,
            expanded_collapsed: w,
            keyboard: w,
            dialog_overlay: w,
            modal_over_different_content: w,
        }
    }

    fn as_array(&self) -> [f64; 6] {
        [
            self.same_data_change,
            self.scrolled,
            self.expanded_collapsed,
            self.keyboard,
            self.dialog_overlay,
            self.modal_over_different_content,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub seed: u64,
    pub app_count: usize,
    /// Captures per app.
    pub screens_per_app: usize,
    /// Distinct screens per app.
    pub screen_types: usize,
    pub dialog_types: usize,
    pub variations: VariationWeights,
    pub planted_issue_rate: f64,
    pub planted_false_positive_rate: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 7,
            app_count: 20,
            screens_per_app: 30,
            screen_types: 8,
            dialog_types: 2,
            variations: VariationWeights::default(),
            planted_issue_rate: 0.15,
            planted_false_positive_rate: 0.2,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.variations.as_array().iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("variation weights must be non-negative");
        }
        for r in [self.planted_issue_rate, self.planted_false_positive_rate] {
            if !(0.0..=1.0).contains(&r) {
                return bad("planted rates must be in [0, 1]");
            }
        }
        if self.app_count == 0 || self.screens_per_app == 0 || self.screen_types == 0 {
            return bad("app_count, screens_per_app and screen_types must be positive");
        }
        if self.screen_types > 9 {
            return bad("at most 9 screen types per app");
        }
        Ok(())
    }
}

/// Same-element ground truth between a group's first capture and another member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldCorrespondence {
    pub template_capture: String,
    pub template_detection: String,
    pub target_capture: String,
    pub gold: Option<String>,
}

impl GoldCorrespondence {
    pub fn judge(&self, predicted: Option<String>) -> CorrespondenceJudgment {
        CorrespondenceJudgment {
            template: self.template_detection.clone(),
            predicted,
            gold: self.gold.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedIssue {
    pub issue_id: String,
    pub capture_id: String,
    /// Identity of the planted finding across captures; `None` for off-element issues.
    pub key: Option<String>,
    pub off_element: bool,
}

/// Everything the generator knows about one bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldFile {
    pub app_id: String,
    pub run_id: String,
    pub visits: Vec<Visit>,
    pub grouping: Vec<Vec<String>>,
    pub correspondences: Vec<GoldCorrespondence>,
    pub ledger: Vec<PlantedIssue>,
}

impl GoldFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// The gold grouping as a storyboard, groups numbered by first appearance.
    pub fn storyboard(&self, bundle: &CaptureBundle) -> Storyboard {
        let mut sb = Storyboard::default();
        for (i, members) in self.grouping.iter().enumerate() {
            sb.groups.push(ScreenGroup {
                group_id: i as u32,
                member_ids: members.clone(),
                representative_id: members[0].clone(),
                mean_embedding: None,
            });
        }
        let mut prev = None;
        for c in &bundle.captures {
            let g = sb.group_of(&c.capture_id);
            if let (Some(a), Some(b)) = (prev, g) {
                if a != b {
                    sb.edges.insert((a, b));
                }
            }
            prev = g;
        }
        sb
    }

    pub fn off_element_ids(&self) -> Vec<&str> {
        self.ledger.iter().filter(|p| p.off_element).map(|p| p.issue_id.as_str()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SynthApp {
    pub model: AppModel,
    pub bundle: CaptureBundle,
    pub gold: GoldFile,
}

impl AppModel {
    /// Renders `visits` as one run of this app.
    pub fn render_run(&self, run_id: &str, visits: &[Visit]) -> Result<(CaptureBundle, GoldFile)> {
        let rendered: Vec<_> = visits
            .iter()
            .enumerate()
            .map(|(i, v)| self.render(run_id, i as u32, v))
            .collect();

        let mut order: Vec<GroupKey> = Vec::new();
        let mut members: HashMap<GroupKey, Vec<usize>> = HashMap::new();
        for (i, v) in visits.iter().enumerate() {
            let k = v.group_key();
            if !members.contains_key(&k) {
                order.push(k);
            }
            members.entry(k).or_default().push(i);
        }
        let grouping = order
            .iter()
            .map(|k| members[k].iter().map(|&i| rendered[i].capture.capture_id.clone()).collect())
            .collect();

        let mut correspondences = Vec::new();
        for k in &order {
            let idx = &members[k];
            let first = &rendered[idx[0]];
            for &m in &idx[1..] {
                let other = &rendered[m];
                let by_key: BTreeMap<&str, &str> = other
                    .element_keys
                    .iter()
                    .zip(&other.capture.detections)
                    .map(|(key, d)| (key.as_str(), d.detection_id.as_str()))
                    .collect();
                for (key, d) in first.element_keys.iter().zip(&first.capture.detections) {
                    correspondences.push(GoldCorrespondence {
                        template_capture: first.capture.capture_id.clone(),
                        template_detection: d.detection_id.clone(),
                        target_capture: other.capture.capture_id.clone(),
                        gold: by_key.get(key.as_str()).map(|s| s.to_string()),
                    });
                }
            }
        }

        let mut ledger = Vec::new();
        for r in &rendered {
            for (issue, key) in r.capture.issues.iter().zip(&r.issue_keys) {
                ledger.push(PlantedIssue {
                    issue_id: issue.issue_id.clone(),
                    capture_id: r.capture.capture_id.clone(),
                    key: key.clone(),
                    off_element: key.is_none(),
                });
            }
        }

        let captures = rendered.into_iter().map(|r| r.capture).collect();
        let bundle = CaptureBundle::new(self.app_id.clone(), run_id, captures, None)?;
        let gold = GoldFile {
            app_id: self.app_id.clone(),
            run_id: run_id.to_string(),
            visits: visits.to_vec(),
            grouping,
            correspondences,
            ledger,
        };
        Ok((bundle, gold))
    }
}

fn app_rng(spec: &SynthSpec, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    rng
}

/// Navigation trace of one run. First visits to a screen are plain.
fn plan_visits(rng: &mut ChaCha8Rng, model: &mut AppModel, spec: &SynthSpec) -> Vec<Visit> {
    let n_screens = model.screen_count();
    let n_dialogs = model.dialog_count();
    // Each dialog belongs to one screen it is normally opened from.
    let homes: Vec<usize> = (0..n_dialogs).map(|_| rng.random_range(0..n_screens)).collect();
    let mut weights = spec.variations.as_array().to_vec();
    if n_dialogs == 0 {
        weights[4] = 0.0;
        weights[5] = 0.0;
    }
    if n_screens < 2 {
        weights[5] = 0.0;
    }
    let total: f64 = 1.0 + weights.iter().sum::<f64>();

    let mut seen = vec![false; n_screens];
    let mut visits = Vec::with_capacity(spec.screens_per_app);
    let mut current = 0usize;
    for i in 0..spec.screens_per_app {
        if i > 0 {
            current = rng.random_range(0..n_screens);
        }
        if !seen[current] {
            seen[current] = true;
            visits.push(Visit {
                screen: current,
                variation: Variation::None,
            });
            continue;
        }
        let mut roll = rng.random_range(0.0..total) - 1.0;
        let mut choice = None;
        for (k, w) in weights.iter().enumerate() {
            if roll < 0.0 {
                break;
            }
            if roll < *w {
                choice = Some(k);
                break;
            }
            roll -= w;
        }
        let (screen, variation) = match choice {
            None => (current, Variation::None),
            Some(0) => {
                let count = rng.random_range(1..=2);
                (current, Variation::SameDataChange {
                    cards: model.fresh_cards(rng, current, count),
                })
            }
            Some(1) => {
                let max = model.max_scroll(current).min(120);
                (current, Variation::Scrolled {
                    offset: rng.random_range(30..=max.max(30)),
                })
            }
            Some(2) => (current, Variation::ExpandedCollapsed),
            Some(3) => (current, Variation::Keyboard),
            Some(4) => {
                let dialog = rng.random_range(0..n_dialogs);
                (homes[dialog], Variation::DialogOverlay { dialog })
            }
            _ => {
                let dialog = rng.random_range(0..n_dialogs);
                let mut screen = current;
                while screen == homes[dialog] {
                    screen = rng.random_range(0..n_screens);
                }
                (screen, Variation::ModalOverDifferentContent { dialog })
            }
        };
        visits.push(Visit { screen, variation });
    }
    visits
}

/// App `index` of the corpus described by `spec`.
pub fn generate_app(spec: &SynthSpec, index: usize) -> Result<SynthApp> {
    spec.validate()?;
    let mut rng = app_rng(spec, index);
    let app_id = format!("app{index:02}");
    let mut model = AppModel::new(
        &mut rng,
        &app_id,
        spec.screen_types,
        spec.dialog_types,
        spec.planted_issue_rate,
        spec.planted_false_positive_rate,
    );
    let visits = plan_visits(&mut rng, &mut model, spec);
    let (bundle, gold) = model.render_run("run1", &visits)?;
    Ok(SynthApp { model, bundle, gold })
}

/// The first app of the corpus.
pub fn generate_bundle(spec: &SynthSpec) -> Result<SynthApp> {
    generate_app(spec, 0)
}

/// All `spec.app_count` apps, generated in parallel.
pub fn generate_corpus(spec: &SynthSpec) -> Result<Vec<SynthApp>> {
    spec.validate()?;
    (0..spec.app_count).into_par_iter().map(|i| generate_app(spec, i)).collect()
}

/// Writes each app as `<out>/<app_id>/` holding the bundle and its `gold.json`.
pub fn write_corpus(apps: &[SynthApp], out: &Path) -> Result<()> {
    apps.par_iter().try_for_each(|app| {
        let dir = out.join(&app.bundle.app_id);
        write_bundle(&app.bundle, &dir)?;
        let path = dir.join(GOLD_FILE);
        let text = serde_json::to_string_pretty(&app.gold)?;
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    })
}
