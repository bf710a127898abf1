use auditboard_core::matching::ncc;
use auditboard_core::raster::GrayPlane;
use auditboard_core::Error;
use proptest::prelude::*;

/// Textbook zero-mean NCC at one placement, straight from the definition.
fn ncc_at(t: &GrayPlane, w: &GrayPlane, ox: u32, oy: u32) -> f64 {
    let n = f64::from(t.width() * t.height());
    let mut tv = Vec::new();
    let mut wv = Vec::new();
    for y in 0..t.height() {
        for x in 0..t.width() {
            tv.push(f64::from(t.get(x, y)));
            wv.push(f64::from(w.get(ox + x, oy + y)));
        }
    }
    let tm = tv.iter().sum::<f64>() / n;
    let wm = wv.iter().sum::<f64>() / n;
    let num: f64 = tv.iter().zip(&wv).map(|(a, b)| (a - tm) * (b - wm)).sum();
    let ts: f64 = tv.iter().map(|a| (a - tm).powi(2)).sum();
    let ws: f64 = wv.iter().map(|b| (b - wm).powi(2)).sum();
    if ts / n <= 1e-6 || ws / n <= 1e-6 {
        0.0
    } else {
        num / (ts * ws).sqrt()
    }
}

fn brute_force(t: &GrayPlane, w: &GrayPlane) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for oy in 0..=w.height() - t.height() {
        for ox in 0..=w.width() - t.width() {
            best = best.max(ncc_at(t, w, ox, oy));
        }
    }
    best
}

fn plane(w: u32, h: u32, data: &[u8]) -> GrayPlane {
    GrayPlane::new(w, h, data.iter().map(|&v| f32::from(v)).collect())
}

#[test]
fn exact_copy_scores_one() {
    let data: Vec<u8> = (0..64).map(|i| ((i * 37) % 251) as u8).collect();
    let window = plane(8, 8, &data);
    let template = window.region(&auditboard_core::geometry::Rect::new(2, 3, 4, 3));
    assert!((ncc(&template, &window).unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn negative_image_scores_minus_one() {
    let data: Vec<u8> = (0..30).map(|i| ((i * 53) % 200) as u8).collect();
    let neg: Vec<u8> = data.iter().map(|v| 255 - v).collect();
    let t = plane(6, 5, &data);
    let w = plane(6, 5, &neg);
    assert!((ncc(&t, &w).unwrap() + 1.0).abs() < 1e-6);
}

#[test]
fn flat_regions_score_zero() {
    let t = plane(3, 3, &[7; 9]);
    let w = plane(5, 5, &(0..25).map(|i| i as u8).collect::<Vec<_>>());
    assert_eq!(ncc(&t, &w).unwrap(), 0.0);
    let t = plane(3, 3, &[1, 2, 3, 4, 5, 6, 7, 8, 9]);
    let w = plane(4, 4, &[100; 16]);
    assert_eq!(ncc(&t, &w).unwrap(), 0.0);
}

#[test]
fn template_larger_than_window_is_an_error() {
    let t = plane(4, 4, &[1; 16]);
    let w = plane(3, 5, &[1; 15]);
    assert!(matches!(ncc(&t, &w), Err(Error::TemplateTooLarge { .. })));
}

proptest! {
    #[test]
    fn agrees_with_brute_force(
        (tw, th, ww, wh) in (1u32..5, 1u32..5, 0u32..4, 0u32..4).prop_map(|(a, b, c, d)| (a, b, a + c, b + d)),
        seed in any::<u64>(),
    ) {
        let mut s = seed;
        let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 56) as u8 };
        let t: Vec<u8> = (0..tw * th).map(|_| next()).collect();
        let w: Vec<u8> = (0..ww * wh).map(|_| next()).collect();
        let (t, w) = (plane(tw, th, &t), plane(ww, wh, &w));
        let got = ncc(&t, &w).unwrap();
        let want = brute_force(&t, &w);
        prop_assert!((got - want).abs() < 1e-4, "ncc {got} vs oracle {want}");
        prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&got));
    }
}
