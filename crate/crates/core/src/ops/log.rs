//! Reproducibility log: which op touched which region, in application order.
//!
//! Wire form of one entry:
//! `{"op": "Rotate", "magnitude": 12.5, "region": [x, y, w, h]}` or with
//! `"region": "global"` for whole-image ops.

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use super::{AugOp, OpError, OpKind};
use crate::imaging::Rect;

/// Where an op was applied. Global entries still carry the full-image rect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Global(Rect),
    Cell(Rect),
}

impl Region {
    pub fn rect(&self) -> Rect {
        match *self {
            Region::Global(r) | Region::Cell(r) => r,
        }
    }

    pub fn is_global(&self) -> bool {
        matches!(self, Region::Global(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpLogEntry {
    pub op: AugOp,
    pub region: Region,
}

impl OpLogEntry {
    pub fn to_record(&self) -> OpRecord {
        OpRecord {
            op: self.op.kind(),
            magnitude: self.op.magnitude(),
            region: match self.region {
                Region::Global(_) => RegionSpec::Global,
                Region::Cell(r) => RegionSpec::Rect(r),
            },
        }
    }
}

impl Serialize for OpLogEntry {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(serializer)
    }
}

/// Region as written on disk. `"global"` is resolved against the image
/// dimensions by [`OpRecord::bind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionSpec {
    Global,
    Rect(Rect),
}

impl Serialize for RegionSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            RegionSpec::Global => serializer.serialize_str("global"),
            RegionSpec::Rect(r) => {
                let mut seq = serializer.serialize_seq(Some(4))?;
                for v in [r.x, r.y, r.w, r.h] {
                    seq.serialize_element(&v)?;
                }
                seq.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for RegionSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RegionVisitor;

        impl<'de> Visitor<'de> for RegionVisitor {
            type Value = RegionSpec;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str(r#""global" or [x, y, w, h]"#)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<RegionSpec, E> {
                if v == "global" {
                    Ok(RegionSpec::Global)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<RegionSpec, A::Error> {
                let mut v = [0u32; 4];
                for (i, slot) in v.iter_mut().enumerate() {
                    *slot = seq
                        .next_element()?
                        .ok_or_else(|| de::Error::invalid_length(i, &self))?;
                }
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(5, &self));
                }
                if v[2] == 0 || v[3] == 0 {
                    return Err(de::Error::custom(
                        "region width and height must be positive",
                    ));
                }
                Ok(RegionSpec::Rect(Rect::new(v[0], v[1], v[2], v[3])))
            }
        }

        deserializer.deserialize_any(RegionVisitor)
    }
}

/// One log entry in wire form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpRecord {
    pub op: OpKind,
    pub magnitude: f64,
    pub region: RegionSpec,
}

impl OpRecord {
    /// Validates the magnitude and resolves `"global"` to the full
    /// `width`x`height` rect.
    pub fn bind(&self, width: u32, height: u32) -> Result<OpLogEntry, OpError> {
        let op = AugOp::new(self.op, self.magnitude)?;
        let region = match self.region {
            RegionSpec::Global => Region::Global(Rect::new(0, 0, width, height)),
            RegionSpec::Rect(r) => Region::Cell(r),
        };
        Ok(OpLogEntry { op, region })
    }
}
