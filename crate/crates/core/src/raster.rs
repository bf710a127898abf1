//! Raster helpers: grayscale planes, crops, resampling and PNG codecs.

use std::io::Cursor;

use base64::Engine as _;
use image::imageops::{self, FilterType};
use image::{ImageBuffer, ImageFormat, Luma, RgbImage};

use crate::error::Result;
use crate::geometry::Rect;

/// A single-channel floating point image (luma, 0..=255 scale).
#[derive(Debug, Clone, PartialEq)]
pub struct GrayPlane {
    width: u32,
    height: u32,
    data: Vec<f32>,
}

impl GrayPlane {
    pub fn new(width: u32, height: u32, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), width as usize * height as usize);
        GrayPlane {
            width,
            height,
            data,
        }
    }

    /// Rec. 601 luma of an RGB image.
    pub fn from_rgb(img: &RgbImage) -> Self {
        let data = img
            .pixels()
            .map(|p| 0.299 * f32::from(p[0]) + 0.587 * f32::from(p[1]) + 0.114 * f32::from(p[2]))
            .collect();
        GrayPlane::new(img.width(), img.height(), data)
    }

    /// Luma of the `rect` region of an RGB image. `rect` must lie inside.
    pub fn from_rgb_region(img: &RgbImage, rect: &Rect) -> Self {
        let mut data = Vec::with_capacity(rect.area() as usize);
        for y in rect.y..rect.bottom() {
            for x in rect.x..rect.right() {
                let p = img.get_pixel(x, y);
                data.push(
                    0.299 * f32::from(p[0]) + 0.587 * f32::from(p[1]) + 0.114 * f32::from(p[2]),
                );
            }
        }
        GrayPlane::new(rect.w, rect.h, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Copies out the `rect` region, which must lie inside the plane.
    pub fn region(&self, rect: &Rect) -> GrayPlane {
        let mut data = Vec::with_capacity(rect.area() as usize);
        let stride = self.width as usize;
        for y in rect.y..rect.bottom() {
            let start = y as usize * stride + rect.x as usize;
            data.extend_from_slice(&self.data[start..start + rect.w as usize]);
        }
        GrayPlane::new(rect.w, rect.h, data)
    }

    /// Bilinear resample to `width` x `height`. Identity when sizes match.
    pub fn resized(&self, width: u32, height: u32) -> GrayPlane {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let buf: ImageBuffer<Luma<f32>, Vec<f32>> =
            ImageBuffer::from_raw(self.width, self.height, self.data.clone())
                .expect("plane dimensions match buffer");
        let out = imageops::resize(&buf, width.max(1), height.max(1), FilterType::Triangle);
        GrayPlane::new(out.width(), out.height(), out.into_raw())
    }
}

/// Copies the `rect` region out of `img`. `rect` must lie inside the image.
pub fn crop_rgb(img: &RgbImage, rect: &Rect) -> RgbImage {
    imageops::crop_imm(img, rect.x, rect.y, rect.w, rect.h).to_image()
}

/// Resizes to `width` pixels wide and `height` pixels tall.
pub fn resize_rgb(img: &RgbImage, width: u32, height: u32) -> RgbImage {
    if img.width() == width && img.height() == height {
        return img.clone();
    }
    imageops::resize(img, width, height, FilterType::Triangle)
}

/// Height that keeps the aspect ratio of a `width` x `height` image scaled to `target_width`.
pub fn scaled_height(width: u32, height: u32, target_width: u32) -> u32 {
    ((f64::from(height) * f64::from(target_width) / f64::from(width.max(1))).round() as u32).max(1)
}

/// Mean squared error over all 8-bit channel values. Sizes must match.
pub fn mse(a: &RgbImage, b: &RgbImage) -> f64 {
    assert_eq!(a.dimensions(), b.dimensions());
    let n = a.as_raw().len();
    if n == 0 {
        return 0.0;
    }
    let sum: u64 = a
        .as_raw()
        .iter()
        .zip(b.as_raw())
        .map(|(&p, &q)| {
            let d = i64::from(p) - i64::from(q);
            (d * d) as u64
        })
        .sum();
    sum as f64 / n as f64
}

pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn decode_png(bytes: &[u8]) -> Result<RgbImage> {
    Ok(image::load_from_memory_with_format(bytes, ImageFormat::Png)?.to_rgb8())
}

pub fn png_base64(img: &RgbImage) -> Result<String> {
    Ok(base64::engine::general_purpose::STANDARD.encode(encode_png(img)?))
}

pub fn png_from_base64(text: &str) -> Result<RgbImage> {
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(text)
        .map_err(|e| crate::error::Error::Config(format!("bad base64 raster: {e}")))?;
    decode_png(&bytes)
}
