//! Grid-local and global image augmentation for person re-identification,
//! with the dataset tooling and CMC/mAP evaluation needed to measure it.
//!
//! - [`imaging`]: RGB buffers, PNG/JPEG I/O, crop and paste.
//! - [`ops`]: the fourteen-op augmentation library.
//! - [`pipeline`]: the multi-mode transform that picks between a global op,
//!   per-cell ops on a grid, or no change.
//! - [`dataset`]: Market-1501 style directory scanning, identity-balanced
//!   batch sampling and synthesis of a corrupted gallery.
//! - [`eval`]: distance matrices, CMC and mAP.

pub mod dataset;
pub mod eval;
pub mod imaging;
pub mod ops;
pub mod pipeline;
pub mod rng;

pub use imaging::{crop, load_image, paste, save_image, Image, ImageError, Rect};
pub use ops::{apply_op, sample_op, AugOp, OpKind, OpLogEntry, Region};
pub use pipeline::{
    mmsl_transform, transform_batch, AugmentedSample, Branch, MmslConfig, PatchCount,
};
pub use rng::RandomStream;
