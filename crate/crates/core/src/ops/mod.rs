//! The fourteen-operation augmentation library.
//!
//! Pixel semantics follow the usual AutoAugment definitions on 8-bit RGB:
//!
//! | kind | magnitude | identity |
//! |------|-----------|----------|
//! | `ShearX`, `ShearY` | shear factor in `[-0.3, 0.3]` | `0` |
//! | `TranslateX`, `TranslateY` | fraction of width/height in `[-0.45, 0.45]` | `0` |
//! | `Rotate` | degrees in `[-30, 30]`, counter-clockwise | `0` |
//! | `Posterize` | kept bits, integer in `4..=8` | `8` |
//! | `Solarize` | threshold in `[0, 256]` | `256` |
//! | `Color`, `Contrast`, `Sharpness`, `Brightness` | blend factor, sampled in `[0.1, 1.9]` | `1` |
//! | `AutoContrast`, `Equalize`, `Invert` | none (stored as `0`) | n/a |
//!
//! The enhancer factors additionally accept `[0, 0.1)` when constructed by
//! hand so the fully degenerate blend (factor `0`) can be requested.

mod enhance;
mod geometric;
mod log;
mod tone;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::Image;
use crate::rng::RandomStream;

pub use enhance::{luminance, smooth_blend_base, Enhancer};
pub use log::{OpLogEntry, OpRecord, Region, RegionSpec};

#[derive(Debug, Error, PartialEq)]
pub enum OpError {
    #[error("magnitude {magnitude} is invalid for {kind}: expected {expected}")]
    InvalidMagnitude {
        kind: OpKind,
        magnitude: f64,
        expected: &'static str,
    },
    #[error("unknown operation name {0:?}")]
    UnknownOp(String),
}

/// The fourteen transform kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpKind {
    ShearX,
    ShearY,
    TranslateX,
    TranslateY,
    Rotate,
    Color,
    Posterize,
    Solarize,
    Contrast,
    Sharpness,
    Brightness,
    AutoContrast,
    Equalize,
    Invert,
}

impl OpKind {
    pub const ALL: [OpKind; 14] = [
        OpKind::ShearX,
        OpKind::ShearY,
        OpKind::TranslateX,
        OpKind::TranslateY,
        OpKind::Rotate,
        OpKind::Color,
        OpKind::Posterize,
        OpKind::Solarize,
        OpKind::Contrast,
        OpKind::Sharpness,
        OpKind::Brightness,
        OpKind::AutoContrast,
        OpKind::Equalize,
        OpKind::Invert,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::ShearX => "ShearX",
            OpKind::ShearY => "ShearY",
            OpKind::TranslateX => "TranslateX",
            OpKind::TranslateY => "TranslateY",
            OpKind::Rotate => "Rotate",
            OpKind::Color => "Color",
            OpKind::Posterize => "Posterize",
            OpKind::Solarize => "Solarize",
            OpKind::Contrast => "Contrast",
            OpKind::Sharpness => "Sharpness",
            OpKind::Brightness => "Brightness",
            OpKind::AutoContrast => "AutoContrast",
            OpKind::Equalize => "Equalize",
            OpKind::Invert => "Invert",
        }
    }

    pub fn from_name(name: &str) -> Result<OpKind, OpError> {
        OpKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| OpError::UnknownOp(name.to_string()))
    }

    /// Whether the op reads its magnitude at all.
    pub fn has_magnitude(self) -> bool {
        !matches!(
            self,
            OpKind::AutoContrast | OpKind::Equalize | OpKind::Invert
        )
    }

    /// The magnitude that makes the op a no-op, when one exists.
    pub fn identity_magnitude(self) -> Option<f64> {
        match self {
            OpKind::ShearX
            | OpKind::ShearY
            | OpKind::TranslateX
            | OpKind::TranslateY
            | OpKind::Rotate => Some(0.0),
            OpKind::Color | OpKind::Contrast | OpKind::Sharpness | OpKind::Brightness => Some(1.0),
            OpKind::Posterize => Some(8.0),
            OpKind::Solarize => Some(256.0),
            OpKind::AutoContrast | OpKind::Equalize | OpKind::Invert => None,
        }
    }

    /// Closed interval that [`sample_op`] draws from. Signed kinds draw the
    /// absolute value from `[0, hi]` and a uniform sign.
    pub fn sampling_range(self) -> (f64, f64) {
        match self {
            OpKind::ShearX | OpKind::ShearY => (-0.3, 0.3),
            OpKind::TranslateX | OpKind::TranslateY => (-0.45, 0.45),
            OpKind::Rotate => (-30.0, 30.0),
            OpKind::Posterize => (4.0, 8.0),
            OpKind::Solarize => (0.0, 256.0),
            OpKind::Color | OpKind::Contrast | OpKind::Sharpness | OpKind::Brightness => (0.1, 1.9),
            OpKind::AutoContrast | OpKind::Equalize | OpKind::Invert => (0.0, 0.0),
        }
    }

    fn valid_range(self) -> (f64, f64) {
        match self {
            OpKind::Color | OpKind::Contrast | OpKind::Sharpness | OpKind::Brightness => (0.0, 1.9),
            other => other.sampling_range(),
        }
    }

    fn is_signed(self) -> bool {
        matches!(
            self,
            OpKind::ShearX
                | OpKind::ShearY
                | OpKind::TranslateX
                | OpKind::TranslateY
                | OpKind::Rotate
        )
    }

    fn expected(self) -> &'static str {
        match self {
            OpKind::ShearX | OpKind::ShearY => "a shear factor in [-0.3, 0.3]",
            OpKind::TranslateX | OpKind::TranslateY => "a fraction in [-0.45, 0.45]",
            OpKind::Rotate => "degrees in [-30, 30]",
            OpKind::Posterize => "an integer bit count in 4..=8",
            OpKind::Solarize => "a threshold in [0, 256]",
            OpKind::Color | OpKind::Contrast | OpKind::Sharpness | OpKind::Brightness => {
                "a factor in [0, 1.9]"
            }
            OpKind::AutoContrast | OpKind::Equalize | OpKind::Invert => "no magnitude",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One transform kind with a validated magnitude.
///
/// Serializes as `{"op": "<Kind>", "magnitude": <number>}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOp", into = "RawOp")]
pub struct AugOp {
    kind: OpKind,
    magnitude: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOp {
    op: OpKind,
    magnitude: f64,
}

impl TryFrom<RawOp> for AugOp {
    type Error = OpError;

    fn try_from(raw: RawOp) -> Result<Self, Self::Error> {
        AugOp::new(raw.op, raw.magnitude)
    }
}

impl From<AugOp> for RawOp {
    fn from(op: AugOp) -> Self {
        RawOp {
            op: op.kind,
            magnitude: op.magnitude,
        }
    }
}

impl AugOp {
    /// Validates `magnitude` against the kind's range. Magnitude-free kinds
    /// accept anything and store `0`.
    pub fn new(kind: OpKind, magnitude: f64) -> Result<Self, OpError> {
        if !kind.has_magnitude() {
            return Ok(AugOp {
                kind,
                magnitude: 0.0,
            });
        }
        let (lo, hi) = kind.valid_range();
        let integral = kind != OpKind::Posterize || magnitude.fract() == 0.0;
        if !magnitude.is_finite() || magnitude < lo || magnitude > hi || !integral {
            return Err(OpError::InvalidMagnitude {
                kind,
                magnitude,
                expected: kind.expected(),
            });
        }
        // normalise -0.0 so logs stay byte-stable
        let magnitude = if magnitude == 0.0 { 0.0 } else { magnitude };
        Ok(AugOp { kind, magnitude })
    }

    /// Magnitude-free op. Panics for kinds that take a magnitude.
    pub fn unit(kind: OpKind) -> Self {
        assert!(!kind.has_magnitude(), "{kind} requires a magnitude");
        AugOp {
            kind,
            magnitude: 0.0,
        }
    }

    /// The op that leaves every image unchanged, for kinds that have one.
    pub fn identity(kind: OpKind) -> Option<Self> {
        kind.identity_magnitude()
            .map(|m| AugOp { kind, magnitude: m })
    }

    pub fn kind(&self) -> OpKind {
        self.kind
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }
}

impl fmt::Display for AugOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.has_magnitude() {
            write!(f, "{}({})", self.kind, self.magnitude)
        } else {
            f.write_str(self.kind.name())
        }
    }
}

/// Draws a kind uniformly from the library, then a magnitude uniformly from
/// its sampling range.
pub fn sample_op(rng: &mut RandomStream) -> AugOp {
    use rand::Rng;

    let kind = OpKind::ALL[rng.index(OpKind::ALL.len())];
    let (lo, hi) = kind.sampling_range();
    let magnitude = if !kind.has_magnitude() {
        0.0
    } else if kind.is_signed() {
        let abs = rng.gen_range(0.0..=hi);
        if rng.coin() {
            -abs
        } else {
            abs
        }
    } else if kind == OpKind::Posterize {
        f64::from(rng.gen_range(lo as u8..=hi as u8))
    } else {
        rng.gen_range(lo..=hi)
    };
    AugOp::new(kind, magnitude).expect("sampled magnitude lies in range")
}

/// Applies `op` to `img`, returning a new image of the same size.
pub fn apply_op(img: &Image, op: AugOp) -> Image {
    let m = op.magnitude;
    match op.kind {
        OpKind::ShearX => geometric::shear_x(img, m),
        OpKind::ShearY => geometric::shear_y(img, m),
        OpKind::TranslateX => {
            geometric::translate(img, (m * f64::from(img.width())).round() as i64, 0)
        }
        OpKind::TranslateY => {
            geometric::translate(img, 0, (m * f64::from(img.height())).round() as i64)
        }
        OpKind::Rotate => geometric::rotate(img, m),
        OpKind::Color => enhance::blend(img, &smooth_blend_base(img, Enhancer::Color), m),
        OpKind::Contrast => enhance::blend(img, &smooth_blend_base(img, Enhancer::Contrast), m),
        OpKind::Sharpness => enhance::blend(img, &smooth_blend_base(img, Enhancer::Sharpness), m),
        OpKind::Brightness => enhance::blend(img, &smooth_blend_base(img, Enhancer::Brightness), m),
        OpKind::Posterize => tone::posterize(img, m as u8),
        OpKind::Solarize => tone::solarize(img, m),
        OpKind::AutoContrast => tone::autocontrast(img),
        OpKind::Equalize => tone::equalize(img),
        OpKind::Invert => tone::invert(img),
    }
}

/// Fill color for pixels that geometric ops map from outside the source.
pub const FILL: [u8; 3] = [128, 128, 128];
