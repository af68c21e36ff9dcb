//! Multi-mode augmentation: one global op, independent ops on a random subset
//! of grid cells, or no change, chosen per image.
//!
//! A single uniform draw `u` picks the branch:
//!
//! - `u < p_g`: one sampled op is applied to the whole image;
//! - `p_g <= u < p_t`: the image is split into a `rows`x`cols` grid, a subset
//!   of cells is selected without replacement, and each selected cell gets its
//!   own sampled op evaluated in cell-local coordinates and pasted back;
//! - otherwise the image is returned unchanged.
//!
//! `p_t` is therefore a cumulative threshold: the grid branch fires with
//! probability `p_t - p_g`. Labels are carried through untouched.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{crop, paste_in_place, Image, ImageError, Rect};
use crate::ops::{apply_op, sample_op, OpLogEntry, Region};
use crate::rng::RandomStream;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot split a {width}x{height} image into {rows}x{cols} cells")]
    DegenerateGrid {
        width: u32,
        height: u32,
        rows: u32,
        cols: u32,
    },
    #[error("cannot select {requested} cells out of {available}")]
    InvalidCount { requested: usize, available: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// How many grid cells the local branch transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum PatchCount {
    /// Exactly `n` cells.
    Fixed { n: usize },
    /// `N` drawn uniformly from `1..=n`, then `N` cells.
    UniformUpTo { n: usize },
}

impl PatchCount {
    pub fn max(&self) -> usize {
        match *self {
            PatchCount::Fixed { n } | PatchCount::UniformUpTo { n } => n,
        }
    }
}

/// Default cell count for a grid: one third of the cells, rounded.
pub fn default_cell_count(rows: u32, cols: u32) -> usize {
    ((f64::from(rows) * f64::from(cols) / 3.0).round() as usize).max(1)
}

/// Branch probabilities, grid geometry, cell count and seed.
///
/// JSON form (unknown keys rejected, missing keys take defaults):
/// `{"p_g":0.2,"p_t":0.5,"rows":5,"cols":5,"patch_count":{"mode":"fixed","n":8},"seed":12345}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmslConfig {
    pub p_g: f64,
    pub p_t: f64,
    pub rows: u32,
    pub cols: u32,
    pub patch_count: PatchCount,
    pub seed: u64,
}

impl Default for MmslConfig {
    fn default() -> Self {
        MmslConfig {
            p_g: 0.2,
            p_t: 0.5,
            rows: 5,
            cols: 5,
            patch_count: PatchCount::Fixed {
                n: default_cell_count(5, 5),
            },
            seed: 0,
        }
    }
}

impl MmslConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let cfg: MmslConfig =
            serde_json::from_str(text).map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.p_g) || !(0.0..=1.0).contains(&self.p_t) {
            return bad(format!(
                "probabilities must lie in [0, 1], got p_g={} p_t={}",
                self.p_g, self.p_t
            ));
        }
        if self.p_g > self.p_t {
            return bad(format!(
                "p_g ({}) must not exceed p_t ({})",
                self.p_g, self.p_t
            ));
        }
        if self.rows == 0 || self.cols == 0 {
            return bad(format!("grid {}x{} has no cells", self.rows, self.cols));
        }
        let cells = self.rows as usize * self.cols as usize;
        let n = self.patch_count.max();
        if n == 0 || n > cells {
            return bad(format!("cell count {n} must lie in 1..={cells}"));
        }
        Ok(())
    }
}

/// Which branch produced a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Global,
    Local,
    Identity,
}

/// Selected grid cells, in selection order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchSelection {
    /// Row-major indices into the grid.
    pub indices: Vec<usize>,
    pub cells: Vec<Rect>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSample<L> {
    pub image: Image,
    pub label: L,
    pub branch: Branch,
    pub log: Vec<OpLogEntry>,
}

/// Splits a `width`x`height` image into `rows`x`cols` cells, row-major.
///
/// Boundaries sit at `floor(j*width/cols)` and `floor(i*height/rows)`, so the
/// cells tile the image exactly.
pub fn grid_partition(
    width: u32,
    height: u32,
    rows: u32,
    cols: u32,
) -> Result<Vec<Rect>, PipelineError> {
    if rows == 0 || cols == 0 || rows > height || cols > width {
        return Err(PipelineError::DegenerateGrid {
            width,
            height,
            rows,
            cols,
        });
    }
    let edge = |i: u32, extent: u32, parts: u32| {
        (u64::from(i) * u64::from(extent) / u64::from(parts)) as u32
    };
    let mut cells = Vec::with_capacity(rows as usize * cols as usize);
    for i in 0..rows {
        let (y0, y1) = (edge(i, height, rows), edge(i + 1, height, rows));
        for j in 0..cols {
            let (x0, x1) = (edge(j, width, cols), edge(j + 1, width, cols));
            cells.push(Rect::new(x0, y0, x1 - x0, y1 - y0));
        }
    }
    Ok(cells)
}

/// Picks distinct cells uniformly without replacement.
pub fn rand_patch(
    cells: &[Rect],
    count: PatchCount,
    rng: &mut RandomStream,
) -> Result<PatchSelection, PipelineError> {
    let n = count.max();
    if n == 0 || n > cells.len() {
        return Err(PipelineError::InvalidCount {
            requested: n,
            available: cells.len(),
        });
    }
    let amount = match count {
        PatchCount::Fixed { n } => n,
        PatchCount::UniformUpTo { n } => 1 + rng.index(n),
    };
    let indices = rand::seq::index::sample(rng, cells.len(), amount).into_vec();
    let cells = indices.iter().map(|&i| cells[i]).collect();
    Ok(PatchSelection { indices, cells })
}

/// Transforms one image. `(img, cfg, rng state)` fully determine the output
/// and the log.
pub fn mmsl_transform<L>(
    img: &Image,
    label: L,
    cfg: &MmslConfig,
    rng: &mut RandomStream,
) -> Result<AugmentedSample<L>, PipelineError> {
    cfg.validate()?;
    // Checked up front so an undersized image fails on every branch alike.
    let cells = grid_partition(img.width(), img.height(), cfg.rows, cfg.cols)?;

    let u = rng.unit();
    let (image, branch, log) = if u < cfg.p_g {
        let op = sample_op(rng);
        let entry = OpLogEntry {
            op,
            region: Region::Global(img.bounds()),
        };
        (apply_op(img, op), Branch::Global, vec![entry])
    } else if u < cfg.p_t {
        let selection = rand_patch(&cells, cfg.patch_count, rng)?;
        let mut out = img.clone();
        let mut log = Vec::with_capacity(selection.cells.len());
        for &cell in &selection.cells {
            let op = sample_op(rng);
            let patch = apply_op(&crop(img, cell)?, op);
            paste_in_place(&mut out, &patch, cell)?;
            log.push(OpLogEntry {
                op,
                region: Region::Cell(cell),
            });
        }
        (out, Branch::Local, log)
    } else {
        (img.clone(), Branch::Identity, Vec::new())
    };

    Ok(AugmentedSample {
        image,
        label,
        branch,
        log,
    })
}

/// [`mmsl_transform`] with the stream derived from `(cfg.seed, key)`.
pub fn transform_keyed<L>(
    img: &Image,
    label: L,
    cfg: &MmslConfig,
    key: u64,
) -> Result<AugmentedSample<L>, PipelineError> {
    let mut rng = RandomStream::substream(cfg.seed, key);
    mmsl_transform(img, label, cfg, &mut rng)
}

/// Transforms every item with its own stream keyed by its position. Items are
/// processed in parallel; the result is identical to a sequential run.
pub fn transform_batch<L>(
    batch: &[(Image, L)],
    cfg: &MmslConfig,
) -> Result<Vec<AugmentedSample<L>>, PipelineError>
where
    L: Clone + Send + Sync,
{
    cfg.validate()?;
    batch
        .par_iter()
        .enumerate()
        .map(|(i, (img, label))| transform_keyed(img, label.clone(), cfg, i as u64))
        .collect()
}

/// Re-applies a log to the original image. Cell entries are cropped,
/// transformed and pasted back in order.
pub fn replay_log(img: &Image, log: &[OpLogEntry]) -> Result<Image, ImageError> {
    let mut out = img.clone();
    for entry in log {
        match entry.region {
            Region::Global(_) => out = apply_op(&out, entry.op),
            Region::Cell(r) => {
                let patch = apply_op(&crop(&out, r)?, entry.op);
                paste_in_place(&mut out, &patch, r)?;
            }
        }
    }
    Ok(out)
}
