//! Composite element groups (tab button + label, toggle + row text, ...).

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::capture::{ElementDetection, ElementKind};
use crate::geometry::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    TabButton,
    Toggle,
    Checkbox,
    SegmentedControl,
    TextField,
    Slider,
    Container,
}

/// A control (the owner) plus the detections that describe it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementGroupRecord {
    pub kind: GroupKind,
    /// The control or border detection the group is built around.
    pub owner_id: String,
    /// Owner first, then the other members in reading order.
    pub member_ids: Vec<String>,
    pub anchor_text_id: Option<String>,
}

impl ElementGroupRecord {
    pub fn contains(&self, id: &str) -> bool {
        self.member_ids.iter().any(|m| m == id)
    }

    /// Members other than the owner.
    pub fn contents(&self) -> impl Iterator<Item = &str> {
        self.member_ids.iter().skip(1).map(String::as_str)
    }
}

/// How far above a slider its label may sit, as a multiple of slider height.
const SLIDER_LABEL_REACH: f64 = 2.0;
/// Minimum reach in pixels, for very thin slider detections.
const SLIDER_LABEL_MIN_REACH: f64 = 24.0;

fn reading_order(a: &ElementDetection, b: &ElementDetection) -> Ordering {
    (a.bbox.y, a.bbox.x)
        .cmp(&(b.bbox.y, b.bbox.x))
        .then_with(|| a.detection_id.cmp(&b.detection_id))
}

fn center_distance(a: &Rect, b: &Rect) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
}

/// Vertical centers within half the control's height.
fn same_row(control: &Rect, other: &Rect) -> bool {
    (control.center().1 - other.center().1).abs() <= f64::from(control.h) / 2.0
}

struct Builder<'a> {
    detections: Vec<&'a ElementDetection>,
    claimed: HashSet<&'a str>,
    groups: Vec<ElementGroupRecord>,
}

impl<'a> Builder<'a> {
    fn unclaimed(&self, kind: Option<ElementKind>) -> impl Iterator<Item = &'a ElementDetection> + '_ {
        self.detections
            .iter()
            .copied()
            .filter(move |d| !self.claimed.contains(d.detection_id.as_str()))
            .filter(move |d| kind.is_none_or(|k| d.kind == k))
    }

    fn closest(
        &self,
        kind: ElementKind,
        to: &Rect,
        pred: impl Fn(&ElementDetection) -> bool,
    ) -> Option<&'a ElementDetection> {
        self.unclaimed(Some(kind))
            .filter(|d| pred(d))
            .min_by(|a, b| {
                center_distance(&a.bbox, to)
                    .total_cmp(&center_distance(&b.bbox, to))
                    .then_with(|| a.detection_id.cmp(&b.detection_id))
            })
    }

    fn push(
        &mut self,
        kind: GroupKind,
        owner: &'a ElementDetection,
        mut members: Vec<&'a ElementDetection>,
        anchor: Option<&'a ElementDetection>,
    ) {
        members.sort_by(|a, b| reading_order(a, b));
        members.dedup_by(|a, b| a.detection_id == b.detection_id);
        self.claimed.insert(&owner.detection_id);
        for m in &members {
            self.claimed.insert(&m.detection_id);
        }
        let member_ids = std::iter::once(owner.detection_id.clone())
            .chain(members.iter().map(|m| m.detection_id.clone()))
            .collect();
        self.groups.push(ElementGroupRecord {
            kind,
            owner_id: owner.detection_id.clone(),
            member_ids,
            anchor_text_id: anchor.map(|a| a.detection_id.clone()),
        });
    }

    fn owners(&self, kind: ElementKind) -> Vec<&'a ElementDetection> {
        self.unclaimed(Some(kind)).collect()
    }
}

/// Groups detections into composite elements. Each detection lands in at
/// most one group. Containment means the member's center lies inside the
/// owner's box.
pub fn build_element_groups(detections: &[ElementDetection]) -> Vec<ElementGroupRecord> {
    let mut sorted: Vec<&ElementDetection> = detections.iter().collect();
    sorted.sort_by(|a, b| reading_order(a, b));
    let mut b = Builder {
        detections: sorted,
        claimed: HashSet::new(),
        groups: Vec::new(),
    };

    // Tab button: icon inside the tab cell plus the nearest label inside it.
    for owner in b.owners(ElementKind::TabButton) {
        let cell = owner.bbox;
        let Some(icon) = b.closest(ElementKind::Icon, &cell, |d| cell.contains_center_of(&d.bbox)) else {
            continue;
        };
        let label = b.closest(ElementKind::Text, &icon.bbox, |d| {
            cell.contains_center_of(&d.bbox) && d.detection_id != icon.detection_id
        });
        let members = std::iter::once(icon).chain(label).collect();
        b.push(GroupKind::TabButton, owner, members, label);
    }

    for (kind, group_kind) in [
        (ElementKind::Toggle, GroupKind::Toggle),
        (ElementKind::Checkbox, GroupKind::Checkbox),
    ] {
        for owner in b.owners(kind) {
            let label = b.closest(ElementKind::Text, &owner.bbox, |d| same_row(&owner.bbox, &d.bbox));
            b.push(group_kind, owner, label.into_iter().collect(), label);
        }
    }

    for owner in b.owners(ElementKind::Slider) {
        let bar = owner.bbox;
        let row_text = b.closest(ElementKind::Text, &bar, |d| same_row(&bar, &d.bbox));
        let reach = (f64::from(bar.h) * SLIDER_LABEL_REACH).max(SLIDER_LABEL_MIN_REACH);
        let above = b.closest(ElementKind::Text, &bar, |d| {
            Some(&d.detection_id) != row_text.map(|r| &r.detection_id)
                && d.bbox.center().1 < f64::from(bar.y)
                && f64::from(bar.y) - f64::from(d.bbox.bottom().min(bar.y)) <= reach
        });
        let anchor = above.or(row_text);
        b.push(GroupKind::Slider, owner, row_text.into_iter().chain(above).collect(), anchor);
    }

    for owner in b.owners(ElementKind::SegmentedControl) {
        let texts: Vec<_> = b
            .unclaimed(Some(ElementKind::Text))
            .filter(|d| owner.bbox.contains_center_of(&d.bbox))
            .collect();
        let anchor = texts.first().copied();
        b.push(GroupKind::SegmentedControl, owner, texts, anchor);
    }

    let mut boxed_owners = b.owners(ElementKind::TextField);
    let mut containers = b.owners(ElementKind::Container);
    containers.sort_by(|x, y| x.bbox.area().cmp(&y.bbox.area()).then_with(|| reading_order(x, y)));
    boxed_owners.extend(containers);
    for owner in boxed_owners {
        let kind = if owner.kind == ElementKind::TextField {
            GroupKind::TextField
        } else {
            GroupKind::Container
        };
        let inside: Vec<_> = b
            .unclaimed(None)
            .filter(|d| d.detection_id != owner.detection_id && owner.bbox.contains_center_of(&d.bbox))
            .collect();
        let anchor = inside.iter().copied().find(|d| d.kind == ElementKind::Text);
        b.push(kind, owner, inside, anchor);
    }

    b.groups
}

/// Lookup from detection id to its group, split by role.
#[derive(Debug, Clone, Default)]
pub struct GroupIndex {
    pub groups: Vec<ElementGroupRecord>,
    owned: HashMap<String, usize>,
    member: HashMap<String, usize>,
}

impl GroupIndex {
    pub fn new(groups: Vec<ElementGroupRecord>) -> Self {
        let mut owned = HashMap::new();
        let mut member = HashMap::new();
        for (i, g) in groups.iter().enumerate() {
            owned.insert(g.owner_id.clone(), i);
            for m in g.contents() {
                member.insert(m.to_string(), i);
            }
        }
        GroupIndex {
            groups,
            owned,
            member,
        }
    }

    /// The group built around `id`, if `id` is a group owner.
    pub fn owned_by(&self, id: &str) -> Option<&ElementGroupRecord> {
        self.owned.get(id).map(|&i| &self.groups[i])
    }

    /// The group `id` belongs to as a non-owner member.
    pub fn containing(&self, id: &str) -> Option<&ElementGroupRecord> {
        self.member.get(id).map(|&i| &self.groups[i])
    }
}

/// Text a group is matched by: the anchor label for single-label controls,
/// or the contained texts in reading order, joined by single spaces.
pub fn group_text(group: &ElementGroupRecord, detections: &[ElementDetection]) -> String {
    let by_id = |id: &str| detections.iter().find(|d| d.detection_id == id);
    match group.kind {
        GroupKind::TabButton | GroupKind::Toggle | GroupKind::Checkbox | GroupKind::Slider => group
            .anchor_text_id
            .as_deref()
            .and_then(by_id)
            .and_then(|d| d.text.clone())
            .unwrap_or_default(),
        GroupKind::SegmentedControl | GroupKind::TextField | GroupKind::Container => group
            .contents()
            .filter_map(by_id)
            .filter(|d| d.kind == ElementKind::Text)
            .filter_map(|d| d.text.as_deref())
            .collect::<Vec<_>>()
            .join(" "),
    }
}

/// True when every non-owner member is an Icon (and there is at least one).
pub fn is_icon_only(group: &ElementGroupRecord, detections: &[ElementDetection]) -> bool {
    let mut any = false;
    for id in group.contents() {
        match detections.iter().find(|d| d.detection_id == id) {
            Some(d) if d.kind == ElementKind::Icon => any = true,
            _ => return false,
        }
    }
    any
}
