mod common;

use auditboard_core::capture::{ElementKind, SimilarityMode};
use auditboard_core::geometry::Rect;
use auditboard_core::grouping::{build_storyboard, multiset_f1, structural_keys, SimilarityScorer};
use auditboard_core::metrics::{pairwise_grouping_metrics, storyboard_partition};
use auditboard_core::synth::{generate_corpus, SynthSpec};
use common::{bundle, capture, detection, pattern};
use image::Rgb;
use proptest::prelude::*;

#[test]
fn revisit_adds_return_edge() {
    let a = pattern(64, 96, 1);
    let b = pattern(64, 96, 40);
    let mut a2 = a.clone();
    a2.put_pixel(3, 3, Rgb([0, 0, 0]));
    let caps = vec![capture("A", 0, a), capture("B", 1, b), capture("A2", 2, a2)];
    let sb = build_storyboard(&bundle(caps), &SimilarityScorer::new(SimilarityMode::Pixel)).unwrap();
    assert_eq!(storyboard_partition(&sb), vec![vec!["A".to_string(), "A2".into()], vec!["B".into()]]);
    assert_eq!(sb.edges.iter().copied().collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);
    assert_eq!(sb.groups[0].representative_id, "A");
}

#[test]
fn staying_on_a_screen_adds_no_edge() {
    let a = pattern(64, 96, 1);
    let caps = vec![capture("A", 0, a.clone()), capture("A2", 1, a)];
    let sb = build_storyboard(&bundle(caps), &SimilarityScorer::new(SimilarityMode::Pixel)).unwrap();
    assert_eq!(sb.groups.len(), 1);
    assert!(sb.edges.is_empty());
}

#[test]
fn embedding_threshold_is_strict() {
    let mut a = capture("A", 0, pattern(8, 8, 0));
    let mut b = capture("B", 1, pattern(8, 8, 0));
    let mut c = capture("C", 2, pattern(8, 8, 0));
    a.embedding = Some(vec![0.0, 0.0]);
    b.embedding = Some(vec![0.19, 0.0]);
    c.embedding = Some(vec![0.0, 0.5]);
    let sb = build_storyboard(&bundle(vec![a, b, c]), &SimilarityScorer::new(SimilarityMode::Embedding)).unwrap();
    assert_eq!(sb.groups.len(), 2);
    assert_eq!(sb.groups[0].member_ids, vec!["A", "B"]);
}

#[test]
fn structural_keys_count_duplicates() {
    let dets = vec![
        detection("1", ElementKind::Text, Rect::new(0, 0, 40, 8), Some("Hello")),
        detection("2", ElementKind::Text, Rect::new(0, 20, 40, 8), Some("hello!")),
        detection("3", ElementKind::Icon, Rect::new(0, 40, 20, 20), None),
    ];
    let keys = structural_keys(&dets);
    assert_eq!(keys.values().sum::<usize>(), 3);
    assert_eq!(keys.len(), 2);
    assert_eq!(multiset_f1(&keys, &keys), 1.0);
    let half = structural_keys(&dets[..1]);
    // 1 shared of 1 and 3: P = 1, R = 1/3.
    assert!((multiset_f1(&half, &keys) - 0.5).abs() < 1e-12);
}

#[test]
fn exact_revisits_group_perfectly_in_pixel_mode() {
    let spec = SynthSpec {
        app_count: 3,
        ..SynthSpec::default()
    };
    for app in generate_corpus(&spec).unwrap() {
        let sb = build_storyboard(&app.bundle, &SimilarityScorer::new(SimilarityMode::Pixel)).unwrap();
        let m = pairwise_grouping_metrics(&sb, &app.gold.grouping).unwrap();
        assert_eq!((m.precision, m.recall), (1.0, 1.0), "{}", app.bundle.app_id);
    }
}

proptest! {
    #[test]
    fn storyboard_is_a_partition(seeds in prop::collection::vec(0u32..5, 1..10), mode in 0usize..2) {
        let caps = seeds
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut c = capture(&format!("c{i}"), i as u32, pattern(32, 48, *s));
                c.embedding = Some(vec![f64::from(*s), 0.0]);
                c
            })
            .collect();
        let b = bundle(caps);
        let mode = [SimilarityMode::Pixel, SimilarityMode::Embedding][mode];
        let sb = build_storyboard(&b, &SimilarityScorer::new(mode)).unwrap();
        sb.validate_for(&b).unwrap();
        // Identical screenshots and embeddings always end up together.
        let part = storyboard_partition(&sb);
        for (i, s) in seeds.iter().enumerate() {
            for (k, t) in seeds.iter().enumerate() {
                let same = part.iter().any(|g| g.contains(&format!("c{i}")) && g.contains(&format!("c{k}")));
                prop_assert_eq!(same, s == t);
            }
        }
        for (a, b) in &sb.edges {
            prop_assert_ne!(a, b);
        }
    }
}
