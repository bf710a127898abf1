use auditboard_core::matching::{indel_distance, normalize_text, template_scales, text_similarity, SCALE_FACTORS};
use proptest::prelude::*;

/// Longest common subsequence by plain recursion with memo.
fn lcs(a: &[char], b: &[char]) -> usize {
    fn go(a: &[char], b: &[char], memo: &mut Vec<Vec<Option<usize>>>) -> usize {
        if a.is_empty() || b.is_empty() {
            return 0;
        }
        if let Some(v) = memo[a.len()][b.len()] {
            return v;
        }
        let v = if a[0] == b[0] {
            1 + go(&a[1..], &b[1..], memo)
        } else {
            go(&a[1..], b, memo).max(go(a, &b[1..], memo))
        };
        memo[a.len()][b.len()] = Some(v);
        v
    }
    let mut memo = vec![vec![None; b.len() + 1]; a.len() + 1];
    go(a, b, &mut memo)
}

fn oracle_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = normalize_text(a).chars().collect();
    let b: Vec<char> = normalize_text(b).chars().collect();
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    2.0 * lcs(&a, &b) as f64 / total as f64
}

#[test]
fn start_and_stop_share_two_letters_in_order() {
    // LCS("start", "stop") = "st": 2 * 2 / 9.
    assert!((oracle_similarity("start", "stop") - 4.0 / 9.0).abs() < 1e-12);
    assert!((text_similarity("start", "stop") - 4.0 / 9.0).abs() < 1e-12);
}

#[test]
fn normalization_ignores_case_punctuation_and_spacing() {
    assert_eq!(normalize_text("  Wi-Fi   Settings! "), "wifi settings");
    assert_eq!(text_similarity("Sign In", "sign  in."), 1.0);
}

#[test]
fn scales_for_750_to_1125() {
    let s = 750.0 / 1125.0;
    let want: Vec<f64> = [0.91, 0.94, 0.97, 1.0, 1.03, 1.06, 1.09].iter().map(|f| f * s).collect();
    let got = template_scales(750, 1125, &SCALE_FACTORS);
    assert_eq!(got.len(), 7);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12);
    }
    assert!((got[3] - 2.0 / 3.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn similarity_matches_oracle(a in "[a-dA-D ,.]{0,12}", b in "[a-dA-D ,.]{0,12}") {
        let got = text_similarity(&a, &b);
        prop_assert!((got - oracle_similarity(&a, &b)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&got));
    }

    #[test]
    fn similarity_is_symmetric(a in "\\PC{0,16}", b in "\\PC{0,16}") {
        prop_assert_eq!(text_similarity(&a, &b), text_similarity(&b, &a));
        prop_assert_eq!(text_similarity(&a, &a), 1.0);
    }

    #[test]
    fn indel_distance_bounds(a in "[xyz]{0,10}", b in "[xyz]{0,10}") {
        let d = indel_distance(&a, &b);
        prop_assert!(d <= a.len() + b.len());
        prop_assert_eq!(d % 2, (a.len() + b.len()) % 2);
    }
}
