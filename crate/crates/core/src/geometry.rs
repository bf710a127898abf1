//! Axis-aligned pixel rectangles.

use serde::{Deserialize, Serialize};

/// A rectangle in screenshot pixel coordinates. `x`/`y` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Rect { x, y, w, h }
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    pub fn is_empty(&self) -> bool {
        self.w == 0 || self.h == 0
    }

    pub fn center(&self) -> (f64, f64) {
        (
            f64::from(self.x) + f64::from(self.w) / 2.0,
            f64::from(self.y) + f64::from(self.h) / 2.0,
        )
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x1 > x0 && y1 > y0).then(|| Rect::new(x0, y0, x1 - x0, y1 - y0))
    }

    /// Intersection over union; 0 when both rectangles are empty.
    pub fn iou(&self, other: &Rect) -> f64 {
        let inter = self.intersection(other).map_or(0, |r| r.area());
        let union = self.area() + other.area() - inter;
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Half-open containment: left/top edges inside, right/bottom outside.
    pub fn contains_point(&self, px: f64, py: f64) -> bool {
        px >= f64::from(self.x)
            && px < f64::from(self.right())
            && py >= f64::from(self.y)
            && py < f64::from(self.bottom())
    }

    pub fn contains_center_of(&self, other: &Rect) -> bool {
        let (cx, cy) = other.center();
        self.contains_point(cx, cy)
    }

    /// Grows the rectangle by `fraction` of its own size on every side,
    /// clipped to a `width` x `height` canvas.
    pub fn padded(&self, fraction: f64, width: u32, height: u32) -> Rect {
        let px = (f64::from(self.w) * fraction).round() as i64;
        let py = (f64::from(self.h) * fraction).round() as i64;
        Rect::clamped(
            i64::from(self.x) - px,
            i64::from(self.y) - py,
            i64::from(self.w) + 2 * px,
            i64::from(self.h) + 2 * py,
            width,
            height,
        )
    }

    /// Builds a rectangle from signed coordinates, clipped to the canvas.
    pub fn clamped(x: i64, y: i64, w: i64, h: i64, width: u32, height: u32) -> Rect {
        let (wi, hi) = (i64::from(width), i64::from(height));
        let x0 = x.clamp(0, wi);
        let y0 = y.clamp(0, hi);
        let x1 = (x + w.max(0)).clamp(0, wi);
        let y1 = (y + h.max(0)).clamp(0, hi);
        Rect::new(x0 as u32, y0 as u32, (x1 - x0) as u32, (y1 - y0) as u32)
    }

    pub fn within(&self, width: u32, height: u32) -> bool {
        self.right() <= width && self.bottom() <= height
    }
}

/// Euclidean distance between two rectangle centers after dividing each by
/// the width of its own screen.
pub fn normalized_center_distance(a: &Rect, a_width: u32, b: &Rect, b_width: u32) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    let (aw, bw) = (f64::from(a_width.max(1)), f64::from(b_width.max(1)));
    ((ax / aw - bx / bw).powi(2) + (ay / aw - by / bw).powi(2)).sqrt()
}
