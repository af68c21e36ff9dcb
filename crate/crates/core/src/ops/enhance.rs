//! Blend enhancers: `out = clamp(round(D + f * (img - D)))` where `D` is a
//! kind-specific degenerate image.

use serde::{Deserialize, Serialize};

use crate::imaging::Image;

/// The four blend-based ops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Enhancer {
    Color,
    Contrast,
    Sharpness,
    Brightness,
}

/// `round(0.299 R + 0.587 G + 0.114 B)`.
pub fn luminance([r, g, b]: [u8; 3]) -> u8 {
    let l = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    l.round().clamp(0.0, 255.0) as u8
}

/// The degenerate image each enhancer blends away from.
///
/// - `Color`: per-pixel luminance gray.
/// - `Contrast`: uniform image at the rounded mean luminance.
/// - `Brightness`: black.
/// - `Sharpness`: 3x3 smoothed image (centre weight 5, neighbours 1, sum 13);
///   the one-pixel border is copied unchanged.
pub fn smooth_blend_base(img: &Image, kind: Enhancer) -> Image {
    let (w, h) = img.dimensions();
    match kind {
        Enhancer::Brightness => Image::filled(w, h, [0, 0, 0]),
        Enhancer::Color => Image::from_fn(w, h, |x, y| {
            let l = luminance(img.pixel(x, y));
            [l, l, l]
        }),
        Enhancer::Contrast => {
            let sum: u64 = img.pixels().map(|p| u64::from(luminance(p))).sum();
            let mean = (sum as f64 / img.pixel_count() as f64).round() as u8;
            Image::filled(w, h, [mean, mean, mean])
        }
        Enhancer::Sharpness => smooth(img),
    }
}

fn smooth(img: &Image) -> Image {
    let (w, h) = img.dimensions();
    let mut out = img.clone();
    if w < 3 || h < 3 {
        return out;
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let mut acc = [0u32; 3];
            for dy in 0..3 {
                for dx in 0..3 {
                    let weight = if dx == 1 && dy == 1 { 5 } else { 1 };
                    let p = img.pixel(x + dx - 1, y + dy - 1);
                    for c in 0..3 {
                        acc[c] += weight * u32::from(p[c]);
                    }
                }
            }
            // 13 is odd so the quotient is never exactly half way
            out.set_pixel(x, y, acc.map(|s| ((s + 6) / 13) as u8));
        }
    }
    out
}

pub(super) fn blend(img: &Image, base: &Image, factor: f64) -> Image {
    let data = img
        .as_raw()
        .iter()
        .zip(base.as_raw())
        .map(|(&v, &d)| {
            let d = f64::from(d);
            (d + factor * (f64::from(v) - d)).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Image::from_raw(img.width(), img.height(), data).expect("same geometry as input")
}
