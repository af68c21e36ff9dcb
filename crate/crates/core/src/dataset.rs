//! Re-ID dataset ingestion, identity-balanced batch sampling, and synthesis of
//! a corrupted ("extreme capture") gallery.
//!
//! Directory layout follows Market-1501 / DukeMTMC-reID:
//! `bounding_box_train/`, `query/`, `bounding_box_test/`. File names encode the
//! identity and camera, e.g. `0002_c1s1_000451_03.jpg` (Market) or
//! `0005_c2_f0046985.jpg` (Duke). Identity `-1` marks junk detections and
//! `0000` marks distractors.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{load_image, save_image, ImageError};
use crate::ops::{apply_op, sample_op, AugOp};
use crate::rng::RandomStream;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed re-ID file name {0:?}")]
    MalformedFilename(String),
    #[error("need {requested} identities but only {available} are available")]
    InsufficientIdentities { requested: usize, available: usize },
    #[error("invalid batch spec: Q={q}, M={m} (both must be positive)")]
    InvalidBatchSpec { q: usize, m: usize },
    #[error("two gallery files map to the same output name {0:?}")]
    DuplicateOutput(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Query,
    Gallery,
}

impl Split {
    pub fn dir_name(self) -> &'static str {
        match self {
            Split::Train => "bounding_box_train",
            Split::Query => "query",
            Split::Gallery => "bounding_box_test",
        }
    }
}

/// One image with its parsed identity and camera.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReidItem {
    pub path: PathBuf,
    /// `-1` for junk detections.
    pub pid: i64,
    pub camid: u32,
    pub junk: bool,
}

/// Parses `{pid}_c{camid}[s{seq}]_{...}` from a file name, returning
/// `(pid, camid)`.
pub fn parse_reid_name(name: &str) -> Option<(i64, u32)> {
    let stem = name.rsplit_once('.').map_or(name, |(s, _)| s);
    let mut parts = stem.split('_');
    let pid_tok = parts.next()?;
    let cam_tok = parts.next()?;
    let rest: Vec<&str> = parts.collect();
    if rest.is_empty() || rest.iter().any(|t| t.is_empty()) {
        return None;
    }

    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let pid = match pid_tok.strip_prefix('-') {
        Some("1") => -1,
        Some(_) => return None,
        None if digits(pid_tok) => pid_tok.parse().ok()?,
        None => return None,
    };

    let cam = cam_tok.strip_prefix('c')?;
    let cam_digits = match cam.split_once('s') {
        Some((c, seq)) if digits(seq) => c,
        Some(_) => return None,
        None => cam,
    };
    if !digits(cam_digits) {
        return None;
    }
    Some((pid, cam_digits.parse().ok()?))
}

fn is_image_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "jpg" | "jpeg" | "png"))
        .unwrap_or(false)
}

/// Lists the images of one split under a dataset root.
pub fn scan_dataset(root: impl AsRef<Path>, split: Split) -> Result<Vec<ReidItem>, DatasetError> {
    scan_dir(root.as_ref().join(split.dir_name()), split)
}

/// Lists `.jpg`/`.jpeg`/`.png` files directly inside `dir`, sorted by path.
/// Junk items are dropped for [`Split::Train`] and kept, flagged, otherwise.
/// Any image whose name does not parse is an error.
pub fn scan_dir(dir: impl AsRef<Path>, split: Split) -> Result<Vec<ReidItem>, DatasetError> {
    let dir = dir.as_ref();
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_file() && is_image_file(&path) {
            paths.push(path);
        }
    }
    paths.sort();

    let mut items = Vec::with_capacity(paths.len());
    for path in paths {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_string();
        let (pid, camid) = parse_reid_name(&name).ok_or(DatasetError::MalformedFilename(name))?;
        let junk = pid < 0;
        if junk && split == Split::Train {
            continue;
        }
        items.push(ReidItem {
            path,
            pid,
            camid,
            junk,
        });
    }
    Ok(items)
}

/// `Q` images for each of `M` identities; batch size `Q*M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchSpec {
    q: usize,
    m: usize,
}

impl BatchSpec {
    pub fn new(q: usize, m: usize) -> Result<Self, DatasetError> {
        if q == 0 || m == 0 {
            return Err(DatasetError::InvalidBatchSpec { q, m });
        }
        Ok(BatchSpec { q, m })
    }

    pub fn images_per_identity(&self) -> usize {
        self.q
    }

    pub fn identities(&self) -> usize {
        self.m
    }

    pub fn batch_size(&self) -> usize {
        self.q * self.m
    }
}

/// Draws `M` distinct identities uniformly, then `Q` images of each: without
/// replacement when the identity has at least `Q` images, with replacement
/// otherwise. Junk items never participate.
pub fn pk_sample(
    items: &[ReidItem],
    spec: BatchSpec,
    rng: &mut RandomStream,
) -> Result<Vec<ReidItem>, DatasetError> {
    let mut by_pid: BTreeMap<i64, Vec<&ReidItem>> = BTreeMap::new();
    for item in items.iter().filter(|i| !i.junk) {
        by_pid.entry(item.pid).or_default().push(item);
    }
    if by_pid.len() < spec.m {
        return Err(DatasetError::InsufficientIdentities {
            requested: spec.m,
            available: by_pid.len(),
        });
    }
    let pids: Vec<&Vec<&ReidItem>> = by_pid.values().collect();
    let mut batch = Vec::with_capacity(spec.batch_size());
    for pick in rand::seq::index::sample(rng, pids.len(), spec.m) {
        let pool = pids[pick];
        if pool.len() >= spec.q {
            for i in rand::seq::index::sample(rng, pool.len(), spec.q) {
                batch.push(pool[i].clone());
            }
        } else {
            for _ in 0..spec.q {
                batch.push(pool[rng.index(pool.len())].clone());
            }
        }
    }
    Ok(batch)
}

/// Output file name → the op applied to produce it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Manifest(pub BTreeMap<String, AugOp>);

impl Manifest {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&AugOp> {
        self.0.get(name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// File name (stem + `.png`) used for a gallery item's corrupted copy.
pub fn synth_output_name(item: &ReidItem) -> String {
    let stem = item
        .path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default();
    format!("{stem}.png")
}

/// Applies one uniformly sampled op to every gallery image and writes the
/// result as PNG under the original stem in `out`, plus `out/manifest.json`.
///
/// Item `i` (in the order given) draws its op from substream `(seed, i)`, so
/// the output does not depend on worker scheduling.
pub fn synth_extreme(
    gallery: &[ReidItem],
    out: impl AsRef<Path>,
    seed: u64,
) -> Result<Manifest, DatasetError> {
    let out = out.as_ref();
    let mut names = HashSet::new();
    for item in gallery {
        let name = synth_output_name(item);
        if !names.insert(name.clone()) {
            return Err(DatasetError::DuplicateOutput(name));
        }
    }
    std::fs::create_dir_all(out).map_err(io_err(out))?;

    let entries = gallery
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let mut rng = RandomStream::substream(seed, i as u64);
            let op = sample_op(&mut rng);
            let img = load_image(&item.path)?;
            let name = synth_output_name(item);
            save_image(&apply_op(&img, op), out.join(&name))?;
            Ok((name, op))
        })
        .collect::<Result<Vec<_>, DatasetError>>()?;

    let manifest = Manifest(entries.into_iter().collect());
    let path = out.join("manifest.json");
    std::fs::write(&path, manifest.to_json()).map_err(io_err(&path))?;
    Ok(manifest)
}
