//! Screen layouts of one synthetic app and rendering of individual visits.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::paint::{text_width, Canvas, Color, IconDesign, Paint, GLYPH_H, INK, MUTED, WHITE};
use super::words::PhraseBook;
use crate::capture::{associate_issue, AccessibilityIssue, ElementDetection, ElementKind, IssueCategory, ScreenCapture};
use crate::geometry::Rect;

pub const SCREEN_W: u32 = 270;
pub const SCREEN_H: u32 = 480;
pub const HEADER_H: u32 = 44;
pub const TAB_BAR_H: u32 = 50;
pub const KEYBOARD_TOP: u32 = 300;
const MARGIN: u32 = 8;
const GAP: u32 = 6;
const CONTENT_W: u32 = SCREEN_W - 2 * MARGIN;
pub const EMBEDDING_DIM: usize = 16;
/// Extra content below the fold so every screen can scroll.
const MIN_OVERFLOW: u32 = 140;
/// Smallest visible slice of a clipped box that still gets detected.
const MIN_CLIPPED_H: i64 = 8;

/// A planted audit finding tied to one element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedIssue {
    pub category: IssueCategory,
    pub check_name: String,
}

#[derive(Debug, Clone)]
pub(crate) struct El {
    /// Identity across captures.
    pub key: String,
    pub kind: ElementKind,
    pub rect: Rect,
    pub text: Option<String>,
    pub paint: Paint,
    pub issue: Option<PlannedIssue>,
}

#[derive(Debug, Clone)]
pub(crate) struct Block {
    /// Top of the block in content coordinates, collapsed layout.
    pub y: u32,
    pub h: u32,
    pub els: Vec<El>,
    pub card: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct ScreenType {
    pub root: bool,
    pub header_color: Color,
    pub header: Vec<El>,
    pub blocks: Vec<Block>,
    /// Rows shown when the screen's collapsible section is open, inserted
    /// after block `expand_after`.
    pub expand_after: usize,
    pub expansion: Block,
    pub embedding: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct DialogType {
    pub rect: Rect,
    pub els: Vec<El>,
    pub embedding: Vec<f64>,
}

/// How a visit differs from the screen's base rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Variation {
    None,
    /// Cards replaced by new content: (block index, title, subtitle).
    SameDataChange { cards: Vec<(usize, String, String)> },
    Scrolled { offset: u32 },
    ExpandedCollapsed,
    Keyboard,
    /// A dialog over the content it was first shown on.
    DialogOverlay { dialog: usize },
    /// The same dialog over some other screen.
    ModalOverDifferentContent { dialog: usize },
}

impl Variation {
    pub fn label(&self) -> &'static str {
        match self {
            Variation::None => "none",
            Variation::SameDataChange { .. } => "same_data_change",
            Variation::Scrolled { .. } => "scrolled",
            Variation::ExpandedCollapsed => "expanded_collapsed",
            Variation::Keyboard => "keyboard",
            Variation::DialogOverlay { .. } => "dialog_overlay",
            Variation::ModalOverDifferentContent { .. } => "modal_over_different_content",
        }
    }

    pub fn dialog(&self) -> Option<usize> {
        match self {
            Variation::DialogOverlay { dialog } | Variation::ModalOverDifferentContent { dialog } => Some(*dialog),
            _ => None,
        }
    }
}

/// One capture to render: a screen (the background, for dialogs) plus a variation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub screen: usize,
    pub variation: Variation,
}

/// Gold "same screen" identity of a visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupKey {
    Screen(usize),
    Dialog(usize),
}

impl Visit {
    pub fn group_key(&self) -> GroupKey {
        match self.variation.dialog() {
            Some(d) => GroupKey::Dialog(d),
            None => GroupKey::Screen(self.screen),
        }
    }
}

/// A rendered capture plus what the generator knows about it.
#[derive(Debug, Clone)]
pub(crate) struct Rendered {
    pub capture: ScreenCapture,
    /// Element identity of each detection, parallel to `capture.detections`.
    pub element_keys: Vec<String>,
    /// Planted identity of each on-element issue (`None` for off-element ones),
    /// parallel to `capture.issues`.
    pub issue_keys: Vec<Option<String>>,
}

fn issue_menu(kind: ElementKind) -> &'static [(IssueCategory, &'static str)] {
    use IssueCategory::*;
    match kind {
        ElementKind::Text => &[
            (Contrast, "Contrast failed"),
            (Contrast, "Contrast nearly passed"),
            (ClippedText, "Text clipped"),
            (LargeText, "Dynamic Type font sizes are unsupported"),
            (LargeText, "Dynamic Type font size partially unsupported"),
        ],
        ElementKind::Icon => &[
            (ElementDescription, "Element has no description"),
            (ElementDescription, "Image name used as description"),
            (HitRegion, "Hit area is too small"),
            (Traits, "Element has no traits"),
        ],
        ElementKind::Picture => &[
            (ElementDescription, "Element has no description"),
            (ElementDescription, "Image name used as description"),
        ],
        ElementKind::Container => &[(ElementDetection, "Element not reachable"), (Traits, "Element has no traits")],
        ElementKind::PageControl => &[(HitRegion, "Hit area is too small")],
        ElementKind::Dialog => &[],
        _ => &[
            (HitRegion, "Hit area is too small"),
            (Traits, "Trait may be missing"),
            (ElementDescription, "Description is not human readable"),
            (ElementDetection, "Element not reachable"),
        ],
    }
}

/// Every check the generator can plant.
pub(crate) fn all_checks() -> Vec<(IssueCategory, &'static str)> {
    let mut out: Vec<(IssueCategory, &'static str)> = Vec::new();
    for k in [ElementKind::Text, ElementKind::Icon, ElementKind::Container, ElementKind::Toggle] {
        for c in issue_menu(k) {
            if !out.contains(c) {
                out.push(*c);
            }
        }
    }
    out
}

fn stable_hash(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.bytes().chain(std::iter::once(0xff)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

struct Factory<'a> {
    rng: &'a mut ChaCha8Rng,
    phrases: &'a mut PhraseBook,
    issue_rate: f64,
}

impl Factory<'_> {
    fn el(&mut self, key: String, kind: ElementKind, rect: Rect, text: Option<String>, paint: Paint) -> El {
        let menu = issue_menu(kind);
        let issue = if !menu.is_empty() && self.rng.random_bool(self.issue_rate) {
            let (category, check) = menu[self.rng.random_range(0..menu.len())];
            Some(PlannedIssue {
                category,
                check_name: check.to_string(),
            })
        } else {
            None
        };
        El {
            key,
            kind,
            rect,
            text,
            paint,
            issue,
        }
    }

    fn text(&mut self, key: String, x: u32, y: u32, max_chars: usize, color: Color) -> El {
        let t = self.phrases.fresh(self.rng, max_chars);
        self.text_of(key, x, y, t, color)
    }

    fn text_of(&mut self, key: String, x: u32, y: u32, t: String, color: Color) -> El {
        let rect = Rect::new(x, y, text_width(&t), GLYPH_H);
        self.el(key, ElementKind::Text, rect, Some(t), Paint::Text { color })
    }

    fn icon(&mut self, key: String, rect: Rect) -> El {
        let design = IconDesign::random(self.rng);
        self.el(key, ElementKind::Icon, rect, None, Paint::Icon(design))
    }

    fn embedding(&mut self) -> Vec<f64> {
        (0..EMBEDDING_DIM).map(|_| self.rng.random_range(-1.0..1.0)).collect()
    }
}

/// Per-screen sizes. Distinct per screen so that bucketed element sizes
/// differ between screens the way they do between real layouts.
#[derive(Debug, Clone, Copy)]
struct Style {
    row_h: u32,
    icon_w: u32,
    icon_h: u32,
}

fn styles(rng: &mut ChaCha8Rng, n: usize) -> Vec<Style> {
    let mut combos = Vec::new();
    for icon_w in [12, 20, 28] {
        for icon_h in [12, 20, 28] {
            combos.push((icon_w, icon_h));
        }
    }
    combos.shuffle(rng);
    (0..n)
        .map(|i| {
            let (icon_w, icon_h) = combos[i % combos.len()];
            let row_h = [36, 44, 52][rng.random_range(0..3)].max(icon_h + 8);
            Style { row_h, icon_w, icon_h }
        })
        .collect()
}

const HEADER_COLORS: [Color; 12] = [
    [0, 122, 255],
    [255, 59, 48],
    [52, 199, 89],
    [255, 149, 0],
    [175, 82, 222],
    [90, 200, 250],
    [255, 45, 85],
    [88, 86, 214],
    [162, 132, 94],
    [48, 176, 199],
    [30, 30, 30],
    [255, 204, 0],
];

/// All screens and dialogs of one app, plus shared chrome.
#[derive(Debug, Clone)]
pub struct AppModel {
    pub app_id: String,
    pub(crate) screens: Vec<ScreenType>,
    pub(crate) dialogs: Vec<DialogType>,
    pub(crate) tab_bar: Vec<El>,
    pub(crate) keyboard: Vec<El>,
    pub(crate) phrases: PhraseBook,
    seed: u64,
    false_positive_rate: f64,
}

impl AppModel {
    pub fn new(
        rng: &mut ChaCha8Rng,
        app_id: &str,
        screen_types: usize,
        dialog_types: usize,
        issue_rate: f64,
        false_positive_rate: f64,
    ) -> Self {
        let mut phrases = PhraseBook::default();
        let seed = rng.random();
        let mut f = Factory {
            rng,
            phrases: &mut phrases,
            issue_rate,
        };

        let tabs = 3u32;
        let cell_w = SCREEN_W / tabs;
        let tab_y = SCREEN_H - TAB_BAR_H;
        let mut tab_bar = Vec::new();
        for i in 0..tabs {
            let cell = Rect::new(i * cell_w, tab_y, cell_w, TAB_BAR_H);
            tab_bar.push(f.el(format!("tab{i}/button"), ElementKind::TabButton, cell, None, Paint::Tab));
            tab_bar.push(f.icon(format!("tab{i}/icon"), Rect::new(cell.x + cell_w / 2 - 10, tab_y + 6, 20, 20)));
            let label = f.phrases.fresh(f.rng, 12);
            let x = cell.x + (cell_w - text_width(&label)) / 2;
            tab_bar.push(f.text_of(format!("tab{i}/label"), x, tab_y + 34, label, INK));
        }

        let mut keyboard = vec![El {
            key: "keyboard/panel".into(),
            kind: ElementKind::Container,
            rect: Rect::new(0, KEYBOARD_TOP, SCREEN_W, SCREEN_H - KEYBOARD_TOP),
            text: None,
            paint: Paint::Keyboard,
            issue: None,
        }];
        for i in 0..3u32 {
            let word = f.phrases.fresh(f.rng, 12);
            let x = i * (SCREEN_W / 3) + (SCREEN_W / 3 - text_width(&word)) / 2;
            let mut e = f.text_of(format!("keyboard/suggestion{i}"), x, KEYBOARD_TOP + 12, word, INK);
            e.issue = None;
            keyboard.push(e);
        }

        let style = styles(f.rng, screen_types);
        let mut colors = HEADER_COLORS.to_vec();
        colors.shuffle(f.rng);
        let back_design = IconDesign::random(f.rng);
        let root_count = screen_types.div_ceil(3).max(1);
        let screens = (0..screen_types)
            .map(|t| build_screen(&mut f, t, t < root_count, style[t], colors[t % colors.len()], &back_design))
            .collect();
        let dialogs = (0..dialog_types).map(|d| build_dialog(&mut f, d)).collect();

        AppModel {
            app_id: app_id.to_string(),
            screens,
            dialogs,
            tab_bar,
            keyboard,
            phrases,
            seed,
            false_positive_rate,
        }
    }

    pub fn screen_count(&self) -> usize {
        self.screens.len()
    }

    pub fn dialog_count(&self) -> usize {
        self.dialogs.len()
    }

    /// Fresh card text for a data-change visit: (block, title, subtitle).
    pub fn fresh_cards(&mut self, rng: &mut ChaCha8Rng, screen: usize, count: usize) -> Vec<(usize, String, String)> {
        let mut cards: Vec<usize> = self.screens[screen]
            .blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.card)
            .map(|(i, _)| i)
            .collect();
        cards.shuffle(rng);
        cards.truncate(count);
        cards.sort_unstable();
        cards
            .into_iter()
            .map(|i| (i, self.phrases.fresh(rng, 20), self.phrases.fresh(rng, 24)))
            .collect()
    }

    pub fn max_scroll(&self, screen: usize) -> u32 {
        let s = &self.screens[screen];
        content_height(s).saturating_sub(viewport(s).h)
    }

    /// Renders one visit as capture `ordinal` of run `run_id`.
    pub(crate) fn render(&self, run_id: &str, ordinal: u32, visit: &Visit) -> Rendered {
        let capture_id = format!("{}-{}-c{:03}", self.app_id, run_id, ordinal);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ stable_hash(&[run_id, &ordinal.to_string()]));
        let screen = &self.screens[visit.screen];
        let mut canvas = Canvas::new(SCREEN_W, SCREEN_H);

        // (element, on-screen rect, accepts issues)
        let mut shown: Vec<(El, Rect, bool)> = Vec::new();

        canvas.fill(0, 0, SCREEN_W, HEADER_H, screen.header_color);
        for e in &screen.header {
            canvas.draw(&e.paint, e.rect.x.into(), e.rect.y.into(), e.rect.w, e.rect.h, e.text.as_deref());
            shown.push((e.clone(), e.rect, true));
        }

        let view = viewport(screen);
        let (scroll, expanded) = match &visit.variation {
            Variation::Scrolled { offset } => (*offset, false),
            Variation::ExpandedCollapsed => (0, true),
            _ => (0, false),
        };
        canvas.clip = view;
        for (el, y) in content_elements(screen, expanded, &visit.variation) {
            let top = i64::from(view.y + MARGIN) + i64::from(y) - i64::from(scroll);
            canvas.draw(&el.paint, el.rect.x.into(), top, el.rect.w, el.rect.h, el.text.as_deref());
            // Partly hidden boxes are detected but not audited.
            if let Some((r, whole)) = visible_part(&el, top, view) {
                shown.push((el, r, whole));
            }
        }
        canvas.clip = Rect::new(0, 0, SCREEN_W, SCREEN_H);

        if screen.root {
            canvas.fill(0, i64::from(SCREEN_H - TAB_BAR_H), SCREEN_W, 1, [200, 200, 204]);
            for e in &self.tab_bar {
                canvas.draw(&e.paint, e.rect.x.into(), e.rect.y.into(), e.rect.w, e.rect.h, e.text.as_deref());
                shown.push((e.clone(), e.rect, true));
            }
        }

        if visit.variation == Variation::Keyboard {
            let panel = self.keyboard[0].rect;
            shown.retain(|(_, r, _)| r.intersection(&panel).is_none());
            for e in &self.keyboard {
                canvas.draw(&e.paint, e.rect.x.into(), e.rect.y.into(), e.rect.w, e.rect.h, e.text.as_deref());
                shown.push((e.clone(), e.rect, false));
            }
        }
        if let Some(d) = visit.variation.dialog() {
            let dialog = &self.dialogs[d];
            canvas.dim(0.45);
            // Background stays detectable but is not audited.
            shown.retain(|(_, r, _)| r.intersection(&dialog.rect).is_none());
            for s in &mut shown {
                s.2 = false;
            }
            for e in &dialog.els {
                canvas.draw(&e.paint, e.rect.x.into(), e.rect.y.into(), e.rect.w, e.rect.h, e.text.as_deref());
                shown.push((e.clone(), e.rect, true));
            }
        }

        let mut detections = Vec::with_capacity(shown.len());
        let mut element_keys = Vec::with_capacity(shown.len());
        let mut issues = Vec::new();
        let mut issue_keys = Vec::new();
        for (n, (el, rect, audited)) in shown.iter().enumerate() {
            let detection_id = format!("{capture_id}/d{n}");
            let confidence = (800 + stable_hash(&[&el.key]) % 200) as f64 / 1000.0;
            detections.push(ElementDetection {
                detection_id,
                kind: el.kind,
                bbox: *rect,
                text: el.text.clone(),
                confidence,
            });
            element_keys.push(el.key.clone());
            if let (true, Some(p)) = (audited, &el.issue) {
                let bbox = jitter(rect, stable_hash(&[&el.key, &p.check_name]));
                issue_keys.push(Some(format!("{}#{}", el.key, p.check_name)));
                issues.push(AccessibilityIssue {
                    issue_id: format!("{capture_id}/i{}", issues.len()),
                    category: p.category,
                    check_name: p.check_name.clone(),
                    message: format!("{} on {}", p.check_name, el.kind),
                    bbox,
                });
            }
        }

        if rng.random_bool(self.false_positive_rate) {
            if let Some(issue) = self.off_element_issue(&mut rng, &capture_id, issues.len(), &detections) {
                issues.push(issue);
                issue_keys.push(None);
            }
        }

        let base = match visit.group_key() {
            GroupKey::Screen(t) => &self.screens[t].embedding,
            GroupKey::Dialog(d) => &self.dialogs[d].embedding,
        };
        let embedding = if visit.variation == Variation::None {
            base.clone()
        } else {
            base.iter().map(|v| v + rng.random_range(-0.025..0.025)).collect()
        };

        Rendered {
            capture: ScreenCapture {
                capture_id,
                ordinal,
                screenshot: Arc::new(canvas.img),
                issues,
                detections,
                embedding: Some(embedding),
                device_scale: 2.0,
            },
            element_keys,
            issue_keys,
        }
    }

    fn off_element_issue(
        &self,
        rng: &mut ChaCha8Rng,
        capture_id: &str,
        n: usize,
        detections: &[ElementDetection],
    ) -> Option<AccessibilityIssue> {
        let checks = all_checks();
        let (category, check) = checks[rng.random_range(0..checks.len())];
        for _ in 0..64 {
            let w = rng.random_range(8..40);
            let h = rng.random_range(6..20);
            let x = rng.random_range(0..SCREEN_W - w);
            let y = rng.random_range(HEADER_H..SCREEN_H - h);
            let issue = AccessibilityIssue {
                issue_id: format!("{capture_id}/i{n}"),
                category,
                check_name: check.to_string(),
                message: format!("{check} on unlabeled region"),
                bbox: Rect::new(x, y, w, h),
            };
            let clear = detections.iter().all(|d| d.bbox.intersection(&issue.bbox).is_none());
            if clear && associate_issue(&issue, detections).is_none() {
                return Some(issue);
            }
        }
        None
    }
}

/// Audit boxes are a little off from what the detector sees.
fn jitter(rect: &Rect, seed: u64) -> Rect {
    let d = |shift: u32| i64::from((seed >> shift) as u32 % 4) - 1;
    let x = i64::from(rect.x) - d(0);
    let y = i64::from(rect.y) - d(8);
    let w = i64::from(rect.w) + d(0) + d(16);
    let h = i64::from(rect.h) + d(8) + d(24);
    Rect::clamped(x, y, w, h, SCREEN_W, SCREEN_H)
}

/// What the detector sees of a content element drawn at `top`. Boxes and
/// pictures are clipped at the viewport edge; anything else must be fully
/// visible to be detected.
fn visible_part(el: &El, top: i64, view: Rect) -> Option<(Rect, bool)> {
    let bottom = top + i64::from(el.rect.h);
    let (lo, hi) = (i64::from(view.y), i64::from(view.bottom()));
    if top >= lo && bottom <= hi {
        return Some((Rect::new(el.rect.x, top as u32, el.rect.w, el.rect.h), true));
    }
    if !matches!(el.kind, ElementKind::Container | ElementKind::Picture) {
        return None;
    }
    let (a, b) = (top.max(lo), bottom.min(hi));
    (b - a >= MIN_CLIPPED_H).then(|| (Rect::new(el.rect.x, a as u32, el.rect.w, (b - a) as u32), false))
}

fn viewport(s: &ScreenType) -> Rect {
    let bottom = if s.root { SCREEN_H - TAB_BAR_H } else { SCREEN_H };
    Rect::new(0, HEADER_H, SCREEN_W, bottom - HEADER_H)
}

fn content_height(s: &ScreenType) -> u32 {
    s.blocks.last().map_or(0, |b| b.y + b.h) + 2 * MARGIN
}

/// Content elements with their top in content coordinates.
fn content_elements(s: &ScreenType, expanded: bool, variation: &Variation) -> Vec<(El, u32)> {
    let mut out = Vec::new();
    let shift = s.expansion.h + GAP;
    let replaced = match variation {
        Variation::SameDataChange { cards } => cards.as_slice(),
        _ => &[],
    };
    for (i, b) in s.blocks.iter().enumerate() {
        let dy = if expanded && i > s.expand_after { shift } else { 0 };
        let swap = replaced.iter().find(|(bi, _, _)| *bi == i);
        for e in &b.els {
            let mut e = e.clone();
            let y = e.rect.y + dy;
            // A card with new content is a new element, and so is its text.
            if let Some((_, title, subtitle)) = swap {
                e.key = format!("{}@{title}", e.key);
                e.issue = None;
                let new_text = match e.key.rsplit('/').next() {
                    Some(r) if r.starts_with("title@") => Some(title),
                    Some(r) if r.starts_with("subtitle@") => Some(subtitle),
                    _ => None,
                };
                if let Some(t) = new_text {
                    e.rect.w = text_width(t);
                    e.text = Some(t.clone());
                }
            }
            out.push((e, y));
        }
        if expanded && i == s.expand_after {
            for e in &s.expansion.els {
                out.push((e.clone(), e.rect.y));
            }
        }
    }
    out
}

fn build_screen(f: &mut Factory<'_>, t: usize, root: bool, st: Style, header_color: Color, back: &IconDesign) -> ScreenType {
    let name = f.phrases.fresh(f.rng, 20);
    let mut header = Vec::new();
    let tx = (SCREEN_W - text_width(&name)) / 2;
    header.push(f.text_of(format!("s{t}/title"), tx, 18, name.clone(), WHITE));
    if !root {
        let paint = Paint::Icon(IconDesign {
            cells: back.cells,
            color: WHITE,
        });
        header.push(f.el(format!("s{t}/back"), ElementKind::Icon, Rect::new(8, 12, 20, 20), None, paint));
    }

    let probe = ScreenType {
        root,
        header_color,
        header: Vec::new(),
        blocks: Vec::new(),
        expand_after: 0,
        expansion: Block {
            y: 0,
            h: 0,
            els: Vec::new(),
            card: false,
        },
        embedding: Vec::new(),
    };
    let target = viewport(&probe).h + MIN_OVERFLOW;

    let mut blocks: Vec<Block> = Vec::new();
    let mut y = 0u32;
    let mut j = 0usize;
    if f.rng.random_bool(0.3) {
        let b = hero_block(f, t, j, y);
        y += b.h + GAP;
        blocks.push(b);
        j += 1;
    }
    while y < target {
        let roll = f.rng.random_range(0..100);
        let b = match roll {
            0..40 => list_row(f, t, j, y, st),
            40..55 => toggle_row(f, t, j, y, st),
            55..75 => card(f, t, j, y, st),
            75..82 => checkbox_row(f, t, j, y, st),
            82..88 => slider_row(f, t, j, y),
            88..94 => segmented(f, t, j, y),
            _ => text_field(f, t, j, y),
        };
        y += b.h + GAP;
        blocks.push(b);
        j += 1;
    }
    // At least two cards, so data changes have something to change.
    while blocks.iter().filter(|b| b.card).count() < 2 {
        let b = card(f, t, j, y, st);
        y += b.h + GAP;
        blocks.push(b);
        j += 1;
    }

    let expand_after = f.rng.random_range(0..blocks.len().min(4));
    let ex_top = blocks[expand_after].y + blocks[expand_after].h + GAP;
    let mut ex_els = Vec::new();
    let mut ey = ex_top;
    for r in 0..f.rng.random_range(2..4) {
        let mut row = detail_row(f, t, r, ey, st);
        ey += row.h + GAP;
        ex_els.append(&mut row.els);
    }
    let expansion = Block {
        y: ex_top,
        h: ey - GAP - ex_top,
        els: ex_els,
        card: false,
    };

    ScreenType {
        root,
        header_color,
        header,
        blocks,
        expand_after,
        expansion,
        embedding: f.embedding(),
    }
}

fn hero_block(f: &mut Factory<'_>, t: usize, j: usize, y: u32) -> Block {
    let k = |r: &str| format!("s{t}/b{j}/{r}");
    let seed = f.rng.random();
    let pic = f.el(k("picture"), ElementKind::Picture, Rect::new(MARGIN, y, CONTENT_W, 100), None, Paint::Picture { seed });
    let count = f.rng.random_range(3..6);
    let dots = f.el(
        k("dots"),
        ElementKind::PageControl,
        Rect::new((SCREEN_W - 12 * count) / 2, y + 106, 12 * count, 10),
        None,
        Paint::PageDots { count, active: 0 },
    );
    Block {
        y,
        h: 116,
        els: vec![pic, dots],
        card: false,
    }
}

fn panel(f: &mut Factory<'_>, key: String, rect: Rect) -> El {
    f.el(key, ElementKind::Container, rect, None, Paint::Panel)
}

fn list_row(f: &mut Factory<'_>, t: usize, j: usize, y: u32, st: Style) -> Block {
    let k = |r: &str| format!("s{t}/b{j}/{r}");
    let h = st.row_h;
    let icon_y = y + (h - st.icon_h) / 2;
    let text_y = y + (h - GLYPH_H) / 2;
    let mut els = vec![
        panel(f, k("row"), Rect::new(MARGIN, y, CONTENT_W, h)),
        f.icon(k("icon"), Rect::new(MARGIN + 8, icon_y, st.icon_w, st.icon_h)),
        f.text(k("title"), MARGIN + 16 + st.icon_w, text_y, 14, INK),
    ];
    let chevron_x = MARGIN + CONTENT_W - 8 - st.icon_w;
    if f.rng.random_bool(0.5) {
        let value = f.phrases.fresh(f.rng, 10);
        let x = chevron_x - 8 - text_width(&value);
        els.push(f.text_of(k("value"), x, text_y, value, MUTED));
    }
    els.push(f.el(
        k("chevron"),
        ElementKind::Icon,
        Rect::new(chevron_x, icon_y, st.icon_w, st.icon_h),
        None,
        Paint::Chevron,
    ));
    Block { y, h, els, card: false }
}

/// Row used inside an expanded section: icon, title and value, no chevron.
fn detail_row(f: &mut Factory<'_>, t: usize, r: u32, y: u32, st: Style) -> Block {
    let k = |role: &str| format!("s{t}/x{r}/{role}");
    let h = st.row_h;
    let text_y = y + (h - GLYPH_H) / 2;
    let value = f.phrases.fresh(f.rng, 10);
    let vx = MARGIN + CONTENT_W - 8 - text_width(&value);
    let els = vec![
        panel(f, k("row"), Rect::new(MARGIN, y, CONTENT_W, h)),
        f.icon(k("icon"), Rect::new(MARGIN + 8, y + (h - st.icon_h) / 2, st.icon_w, st.icon_h)),
        f.text(k("title"), MARGIN + 16 + st.icon_w, text_y, 14, INK),
        f.text_of(k("value"), vx, text_y, value, MUTED),
    ];
    Block { y, h, els, card: false }
}

fn toggle_row(f: &mut Factory<'_>, t: usize, j: usize, y: u32, st: Style) -> Block {
    let k = |r: &str| format!("s{t}/b{j}/{r}");
    let h = st.row_h;
    let on = f.rng.random_bool(0.5);
    let els = vec![
        f.icon(k("icon"), Rect::new(MARGIN + 8, y + (h - st.icon_h) / 2, st.icon_w, st.icon_h)),
        f.text(k("title"), MARGIN + 16 + st.icon_w, y + (h - GLYPH_H) / 2, 16, INK),
        f.el(
            k("toggle"),
            ElementKind::Toggle,
            Rect::new(MARGIN + CONTENT_W - 8 - 36, y + (h - 20) / 2, 36, 20),
            None,
            Paint::Toggle { on },
        ),
    ];
    Block { y, h, els, card: false }
}

fn card(f: &mut Factory<'_>, t: usize, j: usize, y: u32, st: Style) -> Block {
    let k = |r: &str| format!("s{t}/b{j}/{r}");
    let h = st.row_h + 20;
    let els = vec![
        panel(f, k("card"), Rect::new(MARGIN, y, CONTENT_W, h)),
        f.text(k("title"), MARGIN + 8, y + 10, 20, INK),
        f.text(k("subtitle"), MARGIN + 8, y + 10 + GLYPH_H + 8, 24, MUTED),
    ];
    Block { y, h, els, card: true }
}

fn checkbox_row(f: &mut Factory<'_>, t: usize, j: usize, y: u32, st: Style) -> Block {
    let k = |r: &str| format!("s{t}/b{j}/{r}");
    let h = st.row_h;
    let checked = f.rng.random_bool(0.5);
    let els = vec![
        f.el(
            k("checkbox"),
            ElementKind::Checkbox,
            Rect::new(MARGIN + 8, y + (h - 18) / 2, 18, 18),
            None,
            Paint::Checkbox { checked },
        ),
        f.text(k("title"), MARGIN + 34, y + (h - GLYPH_H) / 2, 20, INK),
    ];
    Block { y, h, els, card: false }
}

fn slider_row(f: &mut Factory<'_>, t: usize, j: usize, y: u32) -> Block {
    let k = |r: &str| format!("s{t}/b{j}/{r}");
    let value = f.rng.random_range(0.1..0.9);
    let els = vec![
        f.text(k("label"), MARGIN + 8, y, 20, INK),
        f.el(k("slider"), ElementKind::Slider, Rect::new(MARGIN + 8, y + 14, 190, 16), None, Paint::Slider { value }),
        f.text_of(k("value"), MARGIN + 206, y + 19, format!("{}", (value * 100.0) as u32), MUTED),
    ];
    Block { y, h: 34, els, card: false }
}

fn segmented(f: &mut Factory<'_>, t: usize, j: usize, y: u32) -> Block {
    let k = |r: &str| format!("s{t}/b{j}/{r}");
    let n = f.rng.random_range(2..4u32);
    let seg_w = CONTENT_W / n;
    let mut els = vec![f.el(
        k("segments"),
        ElementKind::SegmentedControl,
        Rect::new(MARGIN, y, CONTENT_W, 28),
        None,
        Paint::Segmented { segments: n },
    )];
    for i in 0..n {
        let label = f.phrases.fresh(f.rng, (seg_w as usize - 8) / 6);
        let x = MARGIN + i * seg_w + (seg_w - text_width(&label)) / 2;
        els.push(f.text_of(k(&format!("seg{i}")), x, y + 11, label, INK));
    }
    Block { y, h: 28, els, card: false }
}

fn text_field(f: &mut Factory<'_>, t: usize, j: usize, y: u32) -> Block {
    let k = |r: &str| format!("s{t}/b{j}/{r}");
    let els = vec![
        f.el(k("field"), ElementKind::TextField, Rect::new(MARGIN, y, CONTENT_W, 30), None, Paint::Field),
        f.text(k("placeholder"), MARGIN + 8, y + 11, 30, MUTED),
    ];
    Block { y, h: 30, els, card: false }
}

fn build_dialog(f: &mut Factory<'_>, d: usize) -> DialogType {
    let k = |r: &str| format!("d{d}/{r}");
    let rect = Rect::new(30, 130, 210, 200);
    let mut els = vec![
        f.el(k("dialog"), ElementKind::Dialog, rect, None, Paint::Dialog),
        f.text(k("title"), rect.x + 12, rect.y + 14, 30, INK),
        f.text(k("line1"), rect.x + 12, rect.y + 34, 30, MUTED),
        f.text(k("line2"), rect.x + 12, rect.y + 48, 30, MUTED),
    ];
    if f.rng.random_bool(0.5) {
        els.push(f.el(
            k("checkbox"),
            ElementKind::Checkbox,
            Rect::new(rect.x + 12, rect.y + 80, 18, 18),
            None,
            Paint::Checkbox { checked: false },
        ));
        els.push(f.text(k("checkbox_label"), rect.x + 38, rect.y + 86, 26, INK));
    }
    for (i, bx) in [rect.x + 12, rect.x + 110].into_iter().enumerate() {
        let b = Rect::new(bx, rect.y + 150, 88, 36);
        els.push(panel(f, k(&format!("button{i}")), b));
        let label = f.phrases.fresh(f.rng, 12);
        let x = b.x + (b.w - text_width(&label)) / 2;
        els.push(f.text_of(k(&format!("button{i}_label")), x, b.y + 15, label, INK));
    }
    DialogType {
        rect,
        els,
        embedding: f.embedding(),
    }
}
