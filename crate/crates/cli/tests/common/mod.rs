#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mmsl_core::eval::{write_labels, write_vectors, EmbeddingSet, SampleMeta};
use mmsl_core::{save_image, Image, RandomStream};
use rand::Rng;

pub fn mmsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmsl"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn noise(rng: &mut RandomStream, w: u32, h: u32) -> Image {
    let mut data = vec![0u8; (w * h * 3) as usize];
    rng.fill(&mut data[..]);
    Image::from_raw(w, h, data).unwrap()
}

/// Writes `n` random PNGs named `img_0000.png`, ...
pub fn write_images(dir: &Path, n: usize, w: u32, h: u32, seed: u64) -> Vec<PathBuf> {
    std::fs::create_dir_all(dir).unwrap();
    let mut rng = RandomStream::from_seed(seed);
    (0..n)
        .map(|i| {
            let p = dir.join(format!("img_{i:04}.png"));
            save_image(&noise(&mut rng, w, h), &p).unwrap();
            p
        })
        .collect()
}

/// Small Market-style gallery with a junk image and a distractor.
pub fn write_gallery(dir: &Path, seed: u64) -> usize {
    std::fs::create_dir_all(dir).unwrap();
    let mut rng = RandomStream::from_seed(seed);
    let names = [
        "0001_c1s1_000101_01.png",
        "0001_c2s1_000201_01.png",
        "0002_c3s2_000301_02.png",
        "0003_c4s3_000401_01.png",
        "0000_c5s1_000501_00.png",
        "-1_c6s1_000601_00.png",
    ];
    for name in names {
        save_image(&noise(&mut rng, 24, 48), dir.join(name)).unwrap();
    }
    names.len()
}

/// Every file under `root`, keyed by relative path.
pub fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Writes `<stem>.emb` and `<stem>.csv` for the given rows and labels.
pub fn write_embeddings(
    dir: &Path,
    stem: &str,
    rows: &[Vec<f32>],
    meta: &[SampleMeta],
) -> (PathBuf, PathBuf) {
    let names = (0..rows.len()).map(|i| format!("{stem}_{i}.jpg")).collect();
    let set = EmbeddingSet::new(rows[0].len(), rows.concat(), meta.to_vec(), names).unwrap();
    let (v, l) = (
        dir.join(format!("{stem}.emb")),
        dir.join(format!("{stem}.csv")),
    );
    write_vectors(&set, &v).unwrap();
    write_labels(&set, &l).unwrap();
    (v, l)
}
