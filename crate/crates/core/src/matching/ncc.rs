//! Zero-mean normalized cross-correlation.

use crate::error::{Error, Result};
use crate::raster::GrayPlane;

/// Variance (per pixel, in squared luma units) below which a region counts as flat.
const FLAT_VARIANCE: f64 = 1e-6;

/// Maximum zero-mean NCC of `template` over every placement inside `window`.
///
/// Placements where either the template or the covered window region has no
/// variance contribute 0. The result lies in `[-1, 1]`.
pub fn ncc(template: &GrayPlane, window: &GrayPlane) -> Result<f64> {
    let (tw, th) = (template.width() as usize, template.height() as usize);
    let (ww, wh) = (window.width() as usize, window.height() as usize);
    if tw > ww || th > wh {
        return Err(Error::TemplateTooLarge {
            template_w: template.width(),
            template_h: template.height(),
            window_w: window.width(),
            window_h: window.height(),
        });
    }
    let n = (tw * th) as f64;
    if n == 0.0 {
        return Ok(0.0);
    }

    let t = template.data();
    let t_mean = t.iter().map(|&v| f64::from(v)).sum::<f64>() / n;
    let centered: Vec<f32> = t.iter().map(|&v| (f64::from(v) - t_mean) as f32).collect();
    let t_ss: f64 = centered.iter().map(|&v| f64::from(v) * f64::from(v)).sum();
    if t_ss / n <= FLAT_VARIANCE {
        return Ok(0.0);
    }

    let integral = Integral::new(window);
    let w = window.data();
    let mut best = f64::NEG_INFINITY;
    for y in 0..=(wh - th) {
        for x in 0..=(ww - tw) {
            let (sum, sum_sq) = integral.region(x, y, tw, th);
            let w_ss = sum_sq - sum * sum / n;
            let score = if w_ss / n <= FLAT_VARIANCE {
                0.0
            } else {
                // The template is zero-mean, so correlating against the raw
                // window equals correlating against the centered one.
                let mut cross = 0.0f64;
                for row in 0..th {
                    let wrow = &w[(y + row) * ww + x..(y + row) * ww + x + tw];
                    let trow = &centered[row * tw..(row + 1) * tw];
                    cross += f64::from(trow.iter().zip(wrow).map(|(a, b)| a * b).sum::<f32>());
                }
                cross / (t_ss * w_ss).sqrt()
            };
            if score > best {
                best = score;
            }
        }
    }
    Ok(best.clamp(-1.0, 1.0))
}

/// Summed-area tables of values and squared values.
struct Integral {
    stride: usize,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Integral {
    fn new(plane: &GrayPlane) -> Self {
        let (w, h) = (plane.width() as usize, plane.height() as usize);
        let stride = w + 1;
        let mut sum = vec![0.0; stride * (h + 1)];
        let mut sum_sq = vec![0.0; stride * (h + 1)];
        let data = plane.data();
        for y in 0..h {
            let (mut row, mut row_sq) = (0.0, 0.0);
            for x in 0..w {
                let v = f64::from(data[y * w + x]);
                row += v;
                row_sq += v * v;
                sum[(y + 1) * stride + x + 1] = sum[y * stride + x + 1] + row;
                sum_sq[(y + 1) * stride + x + 1] = sum_sq[y * stride + x + 1] + row_sq;
            }
        }
        Integral {
            stride,
            sum,
            sum_sq,
        }
    }

    fn region(&self, x: usize, y: usize, w: usize, h: usize) -> (f64, f64) {
        let s = self.stride;
        let at = |t: &[f64], xx: usize, yy: usize| t[yy * s + xx];
        let rect = |t: &[f64]| at(t, x + w, y + h) - at(t, x, y + h) - at(t, x + w, y) + at(t, x, y);
        (rect(&self.sum), rect(&self.sum_sq))
    }
}
