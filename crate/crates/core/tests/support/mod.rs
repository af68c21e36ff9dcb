//! Reference implementations used as test oracles. They follow the written
//! definitions literally and share no code with the library.

#![allow(dead_code)]

use mmsl_core::{Image, RandomStream};
use rand::Rng;

pub fn random_image(rng: &mut RandomStream, w: u32, h: u32) -> Image {
    let mut data = vec![0u8; (w * h * 3) as usize];
    rng.fill(&mut data[..]);
    Image::from_raw(w, h, data).unwrap()
}

/// Random image whose channels only use a few levels, so histograms are
/// lumpy and the equalization step is large.
pub fn lumpy_image(rng: &mut RandomStream, w: u32, h: u32) -> Image {
    let levels: Vec<u8> = (0..rng.gen_range(2..6)).map(|_| rng.gen()).collect();
    let mut data = vec![0u8; (w * h * 3) as usize];
    for v in data.iter_mut() {
        *v = levels[rng.gen_range(0..levels.len())];
    }
    Image::from_raw(w, h, data).unwrap()
}

/// Histogram equalization written straight from its definition:
/// step = (pixels - count of last non-empty bin) div 255, identity when the
/// step is zero, else lut[i] = min(255, (sum_{j<i} count[j] + step div 2) div step).
pub fn equalize_oracle(img: &Image) -> Image {
    let raw = img.as_raw();
    let pixels = raw.len() / 3;
    let mut out = raw.to_vec();
    for c in 0..3 {
        let mut count = vec![0u64; 256];
        for p in 0..pixels {
            count[raw[p * 3 + c] as usize] += 1;
        }
        let mut last = 0;
        for &n in &count {
            if n > 0 {
                last = n;
            }
        }
        let step = (pixels as u64 - last) / 255;
        if step == 0 {
            continue;
        }
        let mut lut = [0u8; 256];
        for (i, slot) in lut.iter_mut().enumerate() {
            let before: u64 = (0..i).map(|j| count[j]).sum();
            *slot = ((before + step / 2) / step).min(255) as u8;
        }
        for p in 0..pixels {
            out[p * 3 + c] = lut[raw[p * 3 + c] as usize];
        }
    }
    Image::from_raw(img.width(), img.height(), out).unwrap()
}

pub fn posterize_oracle(img: &Image, bits: u32) -> Image {
    let drop = 8 - bits;
    img.map_channels(|_, v| (((v as u32) >> drop) << drop) as u8)
}

pub fn solarize_oracle(img: &Image, threshold: f64) -> Image {
    img.map_channels(|_, v| if v as f64 >= threshold { 255 - v } else { v })
}

#[derive(Debug, Clone, Copy)]
pub struct Label {
    pub pid: i64,
    pub cam: u32,
    pub junk: bool,
}

#[derive(Debug, Clone)]
pub struct NaiveResult {
    pub cmc: Vec<f64>,
    pub ap: Vec<Option<f64>>,
    pub map: f64,
}

/// Brute-force re-ID evaluator. Each valid gallery item's rank is obtained by
/// counting the valid items that precede it (smaller distance, or equal
/// distance and smaller index); no sorting is involved.
pub fn naive_evaluate(
    dist: &[Vec<f64>],
    queries: &[Label],
    gallery: &[Label],
    max_rank: usize,
) -> Option<NaiveResult> {
    let mut firsts = Vec::new();
    let mut ap = Vec::new();
    for (qi, q) in queries.iter().enumerate() {
        let valid = |j: usize| {
            let g = gallery[j];
            !g.junk && !(g.pid == q.pid && g.cam == q.cam)
        };
        let rank_of = |j: usize| {
            1 + (0..gallery.len())
                .filter(|&k| valid(k))
                .filter(|&k| dist[qi][k] < dist[qi][j] || (dist[qi][k] == dist[qi][j] && k < j))
                .count()
        };
        let mut relevant: Vec<usize> = (0..gallery.len())
            .filter(|&j| valid(j) && gallery[j].pid == q.pid)
            .map(rank_of)
            .collect();
        if relevant.is_empty() {
            ap.push(None);
            continue;
        }
        relevant.sort_unstable();
        let precisions: Vec<f64> = relevant
            .iter()
            .map(|&r| relevant.iter().filter(|&&s| s <= r).count() as f64 / r as f64)
            .collect();
        ap.push(Some(
            precisions.iter().sum::<f64>() / precisions.len() as f64,
        ));
        firsts.push(relevant[0]);
    }
    if firsts.is_empty() {
        return None;
    }
    let n = firsts.len() as f64;
    let cmc = (1..=max_rank)
        .map(|k| firsts.iter().filter(|&&f| f <= k).count() as f64 / n)
        .collect();
    let map = ap.iter().flatten().sum::<f64>() / n;
    Some(NaiveResult { cmc, ap, map })
}
