//! Pixel drawing for synthetic screens. Text is drawn as hash-derived 5x7
//! glyph blocks so no font stack is involved.

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Rect;

pub const GLYPH_W: u32 = 5;
pub const GLYPH_H: u32 = 7;
pub const GLYPH_ADVANCE: u32 = 6;

pub type Color = [u8; 3];

pub const BACKGROUND: Color = [246, 246, 248];
pub const INK: Color = [28, 28, 30];
pub const MUTED: Color = [120, 120, 128];
pub const BORDER: Color = [206, 206, 212];
pub const WHITE: Color = [255, 255, 255];

pub fn text_width(text: &str) -> u32 {
    let n = text.chars().count() as u32;
    if n == 0 {
        0
    } else {
        n * GLYPH_ADVANCE - 1
    }
}

/// 35-bit glyph pattern for a character; blank for whitespace.
fn glyph_bits(c: char) -> u64 {
    if c.is_whitespace() {
        return 0;
    }
    // FNV-1a over the code point, then a finalizer so neighbours differ.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in (c as u32).to_le_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^= h >> 29;
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^= h >> 32;
    let bits = h & ((1 << 35) - 1);
    // Keep every glyph visibly textured.
    bits | 0b10001 | (0b10001 << 30)
}

/// Small bitmap icon: a 6x6 mirrored grid stretched to the icon box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IconDesign {
    pub cells: [[bool; 6]; 6],
    pub color: Color,
}

impl IconDesign {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        loop {
            let mut cells = [[false; 6]; 6];
            for row in &mut cells {
                for x in 0..3 {
                    let on = rng.random_bool(0.5);
                    row[x] = on;
                    row[5 - x] = on;
                }
            }
            let on = cells.iter().flatten().filter(|c| **c).count();
            if (10..=26).contains(&on) {
                let color = [rng.random_range(20..200), rng.random_range(20..200), rng.random_range(20..200)];
                return IconDesign { cells, color };
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Paint {
    /// Bordered white box (rows, cards, buttons).
    Panel,
    Text { color: Color },
    Icon(IconDesign),
    Chevron,
    Picture { seed: u64 },
    Toggle { on: bool },
    Checkbox { checked: bool },
    Slider { value: f64 },
    Segmented { segments: u32 },
    Field,
    PageDots { count: u32, active: u32 },
    Tab,
    Dialog,
    Keyboard,
}

pub struct Canvas {
    pub img: RgbImage,
    /// Drawing is clipped to this box.
    pub clip: Rect,
}

impl Canvas {
    pub fn new(width: u32, height: u32) -> Self {
        Canvas {
            img: RgbImage::from_pixel(width, height, Rgb(BACKGROUND)),
            clip: Rect::new(0, 0, width, height),
        }
    }

    fn put(&mut self, x: i64, y: i64, c: Color) {
        let clip = self.clip;
        if x < i64::from(clip.x) || y < i64::from(clip.y) || x >= i64::from(clip.right()) || y >= i64::from(clip.bottom()) {
            return;
        }
        self.img.put_pixel(x as u32, y as u32, Rgb(c));
    }

    pub fn fill(&mut self, x: i64, y: i64, w: u32, h: u32, c: Color) {
        for yy in y..y + i64::from(h) {
            for xx in x..x + i64::from(w) {
                self.put(xx, yy, c);
            }
        }
    }

    fn frame(&mut self, x: i64, y: i64, w: u32, h: u32, t: u32, c: Color) {
        self.fill(x, y, w, t, c);
        self.fill(x, y + i64::from(h) - i64::from(t), w, t, c);
        self.fill(x, y, t, h, c);
        self.fill(x + i64::from(w) - i64::from(t), y, t, h, c);
    }

    pub fn text(&mut self, x: i64, y: i64, text: &str, c: Color) {
        for (i, ch) in text.chars().enumerate() {
            let bits = glyph_bits(ch);
            let gx = x + i64::from(i as u32 * GLYPH_ADVANCE);
            for row in 0..GLYPH_H {
                for col in 0..GLYPH_W {
                    if bits >> (row * GLYPH_W + col) & 1 == 1 {
                        self.put(gx + i64::from(col), y + i64::from(row), c);
                    }
                }
            }
        }
    }

    pub fn dim(&mut self, factor: f32) {
        for p in self.img.pixels_mut() {
            for ch in &mut p.0 {
                *ch = (f32::from(*ch) * factor).round() as u8;
            }
        }
    }

    /// Draws `paint` into the box at (x, y). `text` is only used by text paints.
    pub fn draw(&mut self, paint: &Paint, x: i64, y: i64, w: u32, h: u32, text: Option<&str>) {
        match paint {
            Paint::Panel => {
                self.fill(x, y, w, h, WHITE);
                self.frame(x, y, w, h, 1, BORDER);
            }
            Paint::Text { color } => self.text(x, y, text.unwrap_or_default(), *color),
            Paint::Icon(d) => {
                for yy in 0..h {
                    for xx in 0..w {
                        let cx = (xx * 6 / w.max(1)) as usize;
                        let cy = (yy * 6 / h.max(1)) as usize;
                        if d.cells[cy][cx] {
                            self.put(x + i64::from(xx), y + i64::from(yy), d.color);
                        }
                    }
                }
            }
            Paint::Chevron => {
                let (hw, hh) = (f64::from(w) / 2.0, f64::from(h) / 2.0);
                for yy in 0..h {
                    let dy = (f64::from(yy) + 0.5 - hh).abs();
                    let cx = hw * 0.5 + hw * (1.0 - dy / hh.max(1.0));
                    for xx in 0..w {
                        if (f64::from(xx) + 0.5 - cx).abs() <= 1.5 {
                            self.put(x + i64::from(xx), y + i64::from(yy), MUTED);
                        }
                    }
                }
            }
            Paint::Picture { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let grid: Vec<[f64; 3]> = (0..16)
                    .map(|_| [rng.random_range(0.0..255.0), rng.random_range(0.0..255.0), rng.random_range(0.0..255.0)])
                    .collect();
                let stripe = rng.random_range(5..13);
                for yy in 0..h {
                    for xx in 0..w {
                        let fx = f64::from(xx) / f64::from(w.max(2) - 1) * 3.0;
                        let fy = f64::from(yy) / f64::from(h.max(2) - 1) * 3.0;
                        let (ix, iy) = ((fx as usize).min(2), (fy as usize).min(2));
                        let (tx, ty) = (fx - ix as f64, fy - iy as f64);
                        let mut c = [0u8; 3];
                        for (k, out) in c.iter_mut().enumerate() {
                            let a = grid[iy * 4 + ix][k] * (1.0 - tx) + grid[iy * 4 + ix + 1][k] * tx;
                            let b = grid[(iy + 1) * 4 + ix][k] * (1.0 - tx) + grid[(iy + 1) * 4 + ix + 1][k] * tx;
                            let mut v = a * (1.0 - ty) + b * ty;
                            if (xx + yy) / stripe % 2 == 0 {
                                v *= 0.8;
                            }
                            *out = v.clamp(0.0, 255.0) as u8;
                        }
                        self.put(x + i64::from(xx), y + i64::from(yy), c);
                    }
                }
            }
            Paint::Toggle { on } => {
                let track = if *on { [52, 199, 89] } else { [229, 229, 234] };
                self.fill(x, y, w, h, track);
                let knob = h.saturating_sub(4);
                let kx = if *on { x + i64::from(w) - i64::from(knob) - 2 } else { x + 2 };
                self.fill(kx, y + 2, knob, knob, WHITE);
            }
            Paint::Checkbox { checked } => {
                self.frame(x, y, w, h, 2, [0, 122, 255]);
                if *checked {
                    self.fill(x + 4, y + 4, w.saturating_sub(8), h.saturating_sub(8), [0, 122, 255]);
                }
            }
            Paint::Slider { value } => {
                let mid = y + i64::from(h / 2) - 2;
                let filled = (f64::from(w) * value.clamp(0.0, 1.0)) as u32;
                self.fill(x, mid, w, 4, [210, 210, 215]);
                self.fill(x, mid, filled, 4, [0, 122, 255]);
                let k = h.min(14);
                let kx = x + i64::from(filled) - i64::from(k / 2);
                self.fill(kx, y + i64::from((h - k) / 2), k, k, WHITE);
                self.frame(kx, y + i64::from((h - k) / 2), k, k, 1, MUTED);
            }
            Paint::Segmented { segments } => {
                self.fill(x, y, w, h, [238, 238, 240]);
                self.frame(x, y, w, h, 1, MUTED);
                let n = (*segments).max(1);
                for i in 1..n {
                    self.fill(x + i64::from(w * i / n), y, 1, h, MUTED);
                }
                self.fill(x + 2, y + 2, w / n - 3, h.saturating_sub(4), WHITE);
            }
            Paint::Field => {
                self.fill(x, y, w, h, WHITE);
                self.frame(x, y, w, h, 1, MUTED);
            }
            Paint::PageDots { count, active } => {
                let n = (*count).max(1);
                let step = w / n;
                for i in 0..n {
                    let c = if i == *active { INK } else { BORDER };
                    self.fill(x + i64::from(i * step + step / 2) - 3, y + i64::from(h / 2) - 3, 6, 6, c);
                }
            }
            Paint::Tab => self.fill(x, y, w, h, [250, 250, 252]),
            Paint::Dialog => {
                self.fill(x, y, w, h, WHITE);
                self.frame(x, y, w, h, 2, [60, 60, 67]);
            }
            Paint::Keyboard => {
                self.fill(x, y, w, h, [209, 211, 217]);
                let (kw, kh) = (22i64, 30i64);
                let mut ky = y + 34;
                while ky + kh <= y + i64::from(h) {
                    let mut kx = x + 4;
                    while kx + kw <= x + i64::from(w) {
                        self.fill(kx, ky, kw as u32, kh as u32, WHITE);
                        kx += kw + 4;
                    }
                    ky += kh + 8;
                }
            }
        }
    }
}
