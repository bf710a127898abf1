//! Precision, recall, F1 and accuracy for element matching and grouping.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::Storyboard;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn metrics(&self) -> Metrics {
        let ratio = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            precision,
            recall,
            f1,
            accuracy: ratio(self.tp + self.tn, self.total()),
            confusion: *self,
        }
    }
}

impl std::ops::Add for Confusion {
    type Output = Confusion;

    fn add(self, o: Confusion) -> Confusion {
        Confusion {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

impl std::iter::Sum for Confusion {
    fn sum<I: Iterator<Item = Confusion>>(iter: I) -> Confusion {
        iter.fold(Confusion::default(), |a, b| a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub confusion: Confusion,
}

/// One template element: what the matcher found and what it should have found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrespondenceJudgment {
    pub template: String,
    pub predicted: Option<String>,
    pub gold: Option<String>,
}

pub fn matching_confusion(judgments: &[CorrespondenceJudgment]) -> Confusion {
    let mut c = Confusion::default();
    for j in judgments {
        match (&j.predicted, &j.gold) {
            (Some(p), Some(g)) if p == g => c.tp += 1,
            (None, None) => c.tn += 1,
            (Some(_), _) => c.fp += 1,
            (None, Some(_)) => c.fn_ += 1,
        }
    }
    c
}

pub fn matching_metrics(judgments: &[CorrespondenceJudgment]) -> Metrics {
    matching_confusion(judgments).metrics()
}

/// Pair confusion over all unordered capture pairs; positive = same group.
pub fn pairwise_confusion(predicted: &[Vec<String>], gold: &[Vec<String>]) -> Result<Confusion> {
    let labels = |groups: &[Vec<String>], what: &str| -> Result<HashMap<String, usize>> {
        let mut m = HashMap::new();
        for (i, g) in groups.iter().enumerate() {
            for id in g {
                if m.insert(id.clone(), i).is_some() {
                    return Err(Error::CaptureSetMismatch(format!("{id} appears twice in the {what} grouping")));
                }
            }
        }
        Ok(m)
    };
    let p = labels(predicted, "predicted")?;
    let g = labels(gold, "gold")?;
    let ids: BTreeSet<&String> = p.keys().collect();
    if ids != g.keys().collect::<BTreeSet<_>>() {
        return Err(Error::CaptureSetMismatch(
            "predicted and gold groupings cover different captures".into(),
        ));
    }
    let ids: Vec<&String> = ids.into_iter().collect();
    let mut c = Confusion::default();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            match (p[*a] == p[*b], g[*a] == g[*b]) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
    }
    Ok(c)
}

pub fn pairwise_grouping_metrics(predicted: &Storyboard, gold: &[Vec<String>]) -> Result<Metrics> {
    Ok(pairwise_confusion(&storyboard_partition(predicted), gold)?.metrics())
}

pub fn storyboard_partition(storyboard: &Storyboard) -> Vec<Vec<String>> {
    storyboard.groups.iter().map(|g| g.member_ids.clone()).collect()
}
