//! Per-channel lookup-table ops.

use crate::imaging::Image;

fn apply_luts(img: &Image, luts: &[[u8; 256]; 3]) -> Image {
    img.map_channels(|c, v| luts[c][v as usize])
}

fn histograms(img: &Image) -> [[u32; 256]; 3] {
    let mut hist = [[0u32; 256]; 3];
    for p in img.pixels() {
        for c in 0..3 {
            hist[c][p[c] as usize] += 1;
        }
    }
    hist
}

pub(super) fn invert(img: &Image) -> Image {
    img.map_channels(|_, v| 255 - v)
}

/// Keeps the top `bits` bits of each channel.
pub(super) fn posterize(img: &Image, bits: u8) -> Image {
    let mask = (0xFFu16 << (8 - u16::from(bits))) as u8;
    img.map_channels(|_, v| v & mask)
}

/// Inverts every channel value at or above `threshold`.
pub(super) fn solarize(img: &Image, threshold: f64) -> Image {
    img.map_channels(|_, v| {
        if f64::from(v) >= threshold {
            255 - v
        } else {
            v
        }
    })
}

/// Stretches each channel so its darkest value maps to 0 and brightest to
/// 255, rounding to nearest. Constant channels are left alone.
pub(super) fn autocontrast(img: &Image) -> Image {
    let hist = histograms(img);
    let mut luts = [[0u8; 256]; 3];
    for c in 0..3 {
        let lo = hist[c].iter().position(|&n| n > 0).unwrap_or(0) as u32;
        let hi = hist[c].iter().rposition(|&n| n > 0).unwrap_or(255) as u32;
        for (v, slot) in luts[c].iter_mut().enumerate() {
            let v = v as u32;
            *slot = if hi <= lo {
                v as u8
            } else {
                let span = hi - lo;
                let clamped = v.clamp(lo, hi) - lo;
                ((clamped * 255 + span / 2) / span) as u8
            };
        }
    }
    apply_luts(img, &luts)
}

/// Histogram equalisation per channel.
///
/// `step = (pixels - count[last non-empty bin]) / 255`; a zero step leaves
/// the channel unchanged, otherwise `lut[i] = (cumsum_before(i) + step/2) / step`.
pub(super) fn equalize(img: &Image) -> Image {
    let hist = histograms(img);
    let total = img.pixel_count() as u64;
    let mut luts = [[0u8; 256]; 3];
    for c in 0..3 {
        let last = hist[c].iter().rev().find(|&&n| n > 0).copied().unwrap_or(0);
        let step = (total - u64::from(last)) / 255;
        let mut cum = 0u64;
        for (i, slot) in luts[c].iter_mut().enumerate() {
            *slot = match (cum + step / 2).checked_div(step) {
                Some(v) => v.min(255) as u8,
                None => i as u8,
            };
            cum += u64::from(hist[c][i]);
        }
    }
    apply_luts(img, &luts)
}
